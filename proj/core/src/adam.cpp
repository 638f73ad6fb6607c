// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/adam.hpp"

#include <cmath>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

AdamState AdamState::for_parameters(std::span<const NamedTensor<float>> params) {
  AdamState s;
  for (const auto& [name, t] : params) {
    s.m.emplace_back(t.numel(), 0.0f);
    s.v.emplace_back(t.numel(), 0.0f);
  }
  return s;
}

void adam_step(std::span<NamedTensor<float>> params, AdamState& state, const AdamHyper& hyper) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam state tracks " + std::to_string(state.m.size()) + " parameters, got " +
                         std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].second.has_grad()) {
      throw ConfigError("adam_step: missing gradient for trainable parameter '" + params[i].first + "'");
    }
    if (state.m[i].size() != params[i].second.numel()) {
      throw DimensionError("adam state for '" + params[i].first + "' has the wrong size");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  const double b1 = hyper.beta1, b2 = hyper.beta2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].second.mutable_values();
    const auto grad = params[i].second.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double g = grad[k];
      const double mk = b1 * m[k] + (1.0 - b1) * g;
      const double vk = b2 * v[k] + (1.0 - b2) * g * g;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double update = hyper.learning_rate * (mk / correction1) / (std::sqrt(vk / correction2) + hyper.eps);
      values[k] = static_cast<float>(values[k] - update);
    }
  }
}

}  // namespace voxdenoise
