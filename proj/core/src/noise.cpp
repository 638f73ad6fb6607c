// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/noise.hpp"

#include <cmath>
#include <string>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

std::vector<double> standard_normal(NormalStream& stream, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = stream.next();
  return out;
}

Volume add_rician(const Volume& volume, const NoiseSpec& spec) {
  if (!(spec.level >= 0.0 && spec.level <= 1.0)) {
    throw ConfigError("noise level must lie in [0, 1], got " + std::to_string(spec.level));
  }
  for (float v : volume.voxels()) {
    if (v < 0.0f || std::isnan(v)) throw DomainError("Rician noise needs a non-negative magnitude volume");
  }
  const double sigma = static_cast<double>(volume.max()) * spec.level;
  NormalStream stream(spec.seed);
  Volume out(volume.shape());
  const auto in = volume.voxels();
  auto dst = out.voxels();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double real = in[i] + sigma * stream.next();
    const double imag = sigma * stream.next();
    dst[i] = static_cast<float>(std::sqrt(real * real + imag * imag));
  }
  return out;
}

}  // namespace voxdenoise
