// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <sstream>

namespace voxdenoise {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape, std::size_t count) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor shape " + shape_str(shape) + " has a zero-sized axis");
  }
  if (shape_numel(shape) != count) {
    throw DimensionError("tensor shape " + shape_str(shape) + " holds " +
                         std::to_string(shape_numel(shape)) + " elements but " +
                         std::to_string(count) + " values were given");
  }
}

std::atomic<std::uint64_t> next_tape_id{1};

}  // namespace

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), T(0), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::filled(Shape shape, T value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  check_shape(shape, values.size());
  auto s = std::make_shared<detail::TensorStorage<T>>();
  s->shape = std::move(shape);
  s->values = std::move(values);
  s->requires_grad = requires_grad;
  return BasicTensor(std::move(s));
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_grad() const {
  if (storage_->grad.empty()) storage_->grad.assign(storage_->values.size(), T(0));
  return storage_->grad;
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  }
  return storage_->values[0];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
  return from(storage_->shape, storage_->values, storage_->requires_grad);
}

template <typename T>
Tape<T>::Tape() : id_(next_tape_id.fetch_add(1)) {}

template <typename T>
BasicTensor<T> Tape<T>::record(Shape shape, std::vector<T> values,
                               std::initializer_list<BasicTensor<T>> inputs, BackwardFn backward) {
  if (consumed_) throw TapeError("cannot record onto a tape that already ran backward");
#ifndef NDEBUG
  for (T v : values) assert(std::isfinite(v) && "non-finite value produced by a forward op");
#endif
  BasicTensor<T> out = BasicTensor<T>::from(std::move(shape), std::move(values));
  out.storage_->tape_id = id_;
  const bool needs_grad =
      std::any_of(inputs.begin(), inputs.end(), [](const BasicTensor<T>& t) { return t.requires_grad(); });
  if (needs_grad) {
    out.storage_->requires_grad = true;
    nodes_.push_back(Node{out.storage_, std::move(backward)});
  }
  return out;
}

template <typename T>
void Tape<T>::backward(const BasicTensor<T>& loss) {
  if (consumed_) throw TapeError("backward already ran on this tape; run a new forward pass first");
  if (!loss.defined() || loss.numel() != 1) {
    throw TapeError("backward requires a scalar loss");
  }
  if (loss.storage_->tape_id != id_) {
    throw TapeError("loss was not produced on this tape");
  }
  consumed_ = true;
  if (!loss.requires_grad()) return;
  loss.storage_->grad.assign(1, T(1));
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->backward(it->output->grad);
    it->backward = nullptr;  // releases saved activations early
  }
  nodes_.clear();
}

template <typename T>
void Tape<T>::accumulate(const BasicTensor<T>& t, std::span<const T> g) {
  if (!t.requires_grad()) return;
  auto& grad = t.storage_->grad;
  if (grad.empty()) {
    grad.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace voxdenoise
