// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

// Central finite-difference oracle for tape gradients.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "voxdenoise/tensor.hpp"

namespace voxdenoise::testing {

struct GradCheck {
  double rel_error = 0.0;  // max |analytic - numeric| / max |numeric|
  double max_abs_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose +-h perturbation crossed a kink
};

using LossFn = std::function<Tensor64(Tape64&)>;

/// Compares the tape gradient of `loss` with respect to every tensor in
/// `inputs` against (f(x+h) - f(x-h)) / 2h. `loss` must read the inputs
/// through shared handles so in-place perturbation is seen. Coordinates where
/// a rectifier input changes sign between the two probes are skipped.
inline GradCheck gradcheck(const LossFn& loss, std::vector<Tensor64> inputs, double h = 1e-3) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape64 tape;
    const auto l = loss(tape);
    tape.backward(l);
    for (auto& t : inputs) {
      if (t.has_grad()) {
        analytic.emplace_back(t.grad().begin(), t.grad().end());
      } else {
        analytic.emplace_back(t.numel(), 0.0);
      }
    }
  }
  const auto probe = [&](std::vector<bool>& signs) {
    Tape64 tape;
    tape.set_track_kinks(true);
    const double v = loss(tape).item();
    signs = tape.kink_signs();
    return v;
  };

  GradCheck out;
  double max_diff = 0.0;
  std::vector<bool> sp, sm;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].mutable_values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double x = values[k];
      values[k] = x + h;
      const double fp = probe(sp);
      values[k] = x - h;
      const double fm = probe(sm);
      values[k] = x;
      if (sp != sm) {
        ++out.skipped;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * h);
      max_diff = std::max(max_diff, std::abs(analytic[i][k] - numeric));
      out.max_abs_numeric = std::max(out.max_abs_numeric, std::abs(numeric));
      ++out.checked;
    }
  }
  out.rel_error = out.max_abs_numeric > 0.0 ? max_diff / out.max_abs_numeric : max_diff;
  return out;
}

inline Tensor64 random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor64::from(std::move(shape), std::move(v));
}

template <typename T>
std::vector<T> random_values(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return v;
}

}  // namespace voxdenoise::testing
