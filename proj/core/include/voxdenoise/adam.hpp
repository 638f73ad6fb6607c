// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxdenoise/model.hpp"

namespace voxdenoise {

struct AdamHyper {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates, one array per parameter in the same
/// order as the parameter list they were created for.
struct AdamState {
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
  std::uint64_t step = 0;

  static AdamState for_parameters(std::span<const NamedTensor<float>> params);
  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. Throws ConfigError when a parameter has no gradient.
void adam_step(std::span<NamedTensor<float>> params, AdamState& state, const AdamHyper& hyper);

}  // namespace voxdenoise
