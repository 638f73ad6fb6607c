// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "voxdenoise/volume.hpp"

namespace voxdenoise {

/// Noise level as a fraction of the volume maximum, plus the sampling seed.
struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::array<double, 3> kStandardNoiseLevels = {0.03, 0.09, 0.15};

/// Seeded i.i.d. N(0, 1) source.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

std::vector<double> standard_normal(NormalStream& stream, std::size_t n);

/// Magnitude of a complex signal whose real and imaginary channels carry
/// independent Gaussian noise of standard deviation level * max(volume):
///   A = sqrt((I + a*L*n_r)^2 + (a*L*n_i)^2).
/// Draws n_r then n_i for each voxel in storage order.
Volume add_rician(const Volume& volume, const NoiseSpec& spec);

}  // namespace voxdenoise
