// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class Tape;

namespace detail {

template <typename T>
struct TensorStorage {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until a backward pass reaches the tensor
  bool requires_grad = false;
  std::uint64_t tape_id = 0;  // 0 for leaves
};

}  // namespace detail

/// Shared handle to an n-dimensional row-major array that can take part in a
/// differentiation tape. Copies alias the same storage.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor filled(Shape shape, T value, bool requires_grad = false);
  static BasicTensor from(Shape shape, std::vector<T> values, bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t dim(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t numel() const { return storage_->values.size(); }

  std::span<const T> values() const { return storage_->values; }
  /// Write access for initializers and optimizers. Never use on tensors that a
  /// live tape still references.
  std::span<T> mutable_values() { return storage_->values; }

  bool requires_grad() const { return storage_->requires_grad; }
  void set_requires_grad(bool flag) { storage_->requires_grad = flag; }

  bool has_grad() const { return !storage_->grad.empty(); }
  std::span<const T> grad() const { return storage_->grad; }
  /// Gradient buffer, allocated as zeros on first use. Handles share storage,
  /// so this is available through const handles held by backward closures.
  std::span<T> mutable_grad() const;
  void zero_grad() { storage_->grad.clear(); }

  /// Value of a single-element tensor.
  T item() const;

  /// Deep copy without tape linkage or gradient.
  BasicTensor clone() const;

  bool same_storage(const BasicTensor& other) const { return storage_ == other.storage_; }

 private:
  explicit BasicTensor(std::shared_ptr<detail::TensorStorage<T>> s) : storage_(std::move(s)) {}

  std::shared_ptr<detail::TensorStorage<T>> storage_;

  friend class Tape<T>;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// Records operations in execution order so gradients can be propagated in
/// reverse. A tape supports exactly one backward pass.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(std::span<const T> out_grad)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Creates an op output. When none of `inputs` requires a gradient the
  /// backward closure is dropped and the output is a constant.
  BasicTensor<T> record(Shape shape, std::vector<T> values,
                        std::initializer_list<BasicTensor<T>> inputs, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded closure in reverse.
  void backward(const BasicTensor<T>& loss);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }
  std::uint64_t id() const { return id_; }

  /// When enabled, inputs of rectifier-type activations record their sign so
  /// callers (finite-difference checks) can detect kink crossings between two
  /// passes.
  void set_track_kinks(bool flag) { track_kinks_ = flag; }
  bool track_kinks() const { return track_kinks_; }
  std::vector<bool>& kink_signs() { return kink_signs_; }
  const std::vector<bool>& kink_signs() const { return kink_signs_; }

  /// Accumulates `g` into `t.grad`, allocating it on first touch.
  static void accumulate(const BasicTensor<T>& t, std::span<const T> g);

 private:
  struct Node {
    std::shared_ptr<detail::TensorStorage<T>> output;
    BackwardFn backward;
  };

  std::uint64_t id_;
  bool consumed_ = false;
  bool track_kinks_ = false;
  std::vector<Node> nodes_;
  std::vector<bool> kink_signs_;
};

using Tape32 = Tape<float>;
using Tape64 = Tape<double>;

}  // namespace voxdenoise
