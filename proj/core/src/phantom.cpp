// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

namespace {

constexpr int kPlacementAttempts = 1000;

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += k[i + radius];
  }
  for (auto& v : k) v /= total;
  return k;
}

// Separable blur along one axis of an HxWxC field, clamping at the borders.
void blur_axis(std::vector<double>& field, const VolumeShape& s, int axis, double sigma) {
  if (sigma <= 0.0) return;
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const std::size_t dims[3] = {s.height, s.width, s.slices};
  const std::size_t strides[3] = {s.width * s.slices, s.slices, 1};
  const int n = static_cast<int>(dims[axis]);
  std::vector<double> out(field.size());
  for (std::size_t r = 0; r < s.height; ++r) {
    for (std::size_t c = 0; c < s.width; ++c) {
      for (std::size_t z = 0; z < s.slices; ++z) {
        const std::size_t pos[3] = {r, c, z};
        const std::size_t base = (r * s.width + c) * s.slices + z - pos[axis] * strides[axis];
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int j = std::clamp(static_cast<int>(pos[axis]) + t, 0, n - 1);
          acc += k[t + radius] * field[base + static_cast<std::size_t>(j) * strides[axis]];
        }
        out[(r * s.width + c) * s.slices + z] = acc;
      }
    }
  }
  field.swap(out);
}

}  // namespace

void PhantomSpec::validate() const {
  if (shape.height == 0 || shape.width == 0 || shape.slices == 0) {
    throw ConfigError("phantom shape " + shape.str() + " has a zero dimension");
  }
  if (lesion_radius_min < 1.0 || lesion_radius_max < lesion_radius_min) {
    throw ConfigError("lesion radii must satisfy 1 <= min <= max");
  }
  if (lesion_contrast <= 1.0) throw ConfigError("lesion contrast must exceed 1");
  if (smoothness < 0.0) throw ConfigError("background smoothness must be non-negative");
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const VolumeShape s = spec.shape;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double cr = (static_cast<double>(s.height) - 1.0) / 2.0;
  const double cc = (static_cast<double>(s.width) - 1.0) / 2.0;
  const double cz = (static_cast<double>(s.slices) - 1.0) / 2.0;
  const double ar = 0.42 * static_cast<double>(s.height) * (0.95 + 0.1 * unit(rng));
  const double ac = 0.40 * static_cast<double>(s.width) * (0.95 + 0.1 * unit(rng));
  const double az = std::max(1.0, static_cast<double>(s.slices));

  Phantom p{Volume(s), Volume(s), Volume(s)};
  for (std::size_t r = 0; r < s.height; ++r) {
    for (std::size_t c = 0; c < s.width; ++c) {
      for (std::size_t z = 0; z < s.slices; ++z) {
        const double dr = (r - cr) / ar, dc = (c - cc) / ac, dz = (z - cz) / az;
        if (dr * dr + dc * dc + dz * dz <= 1.0) p.tissue_mask.at(r, c, z) = 1.0f;
      }
    }
  }

  std::vector<double> field(s.voxels());
  for (auto& v : field) v = normal(rng);
  blur_axis(field, s, 0, spec.smoothness);
  blur_axis(field, s, 1, spec.smoothness);
  blur_axis(field, s, 2, 1.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (p.tissue_mask.voxels()[i] > 0.0f) peak = std::max(peak, std::abs(field[i]));
  }
  if (peak == 0.0) peak = 1.0;

  std::vector<double> intensity(s.voxels(), 0.0);
  const double vr = 0.14 * static_cast<double>(s.height);
  const double vc = 0.07 * static_cast<double>(s.width);
  double brightest = 0.0;
  for (std::size_t r = 0; r < s.height; ++r) {
    for (std::size_t c = 0; c < s.width; ++c) {
      const double dr = (r - cr) / vr, dc = (c - cc) / vc;
      const bool ventricle = dr * dr + dc * dc <= 1.0;
      for (std::size_t z = 0; z < s.slices; ++z) {
        const std::size_t i = p.clean.index(r, c, z);
        if (p.tissue_mask.voxels()[i] == 0.0f) continue;
        double v = 0.5 + 0.2 * field[i] / peak;
        if (ventricle) v *= 0.4;
        intensity[i] = v;
        brightest = std::max(brightest, v);
      }
    }
  }

  const double lesion_value = spec.lesion_contrast * brightest;
  std::uniform_real_distribution<double> radius(spec.lesion_radius_min, spec.lesion_radius_max);
  for (std::size_t l = 0; l < spec.n_lesions; ++l) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const double rr = radius(rng), rc = radius(rng), rz = radius(rng);
      const double pr = unit(rng) * (s.height - 1), pc = unit(rng) * (s.width - 1),
                   pz = unit(rng) * (s.slices - 1);
      std::vector<std::size_t> voxels;
      bool inside = true;
      const auto lo = [](double centre, double rad) { return static_cast<long>(std::floor(centre - rad)); };
      const auto hi = [](double centre, double rad) { return static_cast<long>(std::ceil(centre + rad)); };
      for (long r = lo(pr, rr); r <= hi(pr, rr) && inside; ++r) {
        for (long c = lo(pc, rc); c <= hi(pc, rc) && inside; ++c) {
          for (long z = lo(pz, rz); z <= hi(pz, rz); ++z) {
            const double dr = (r - pr) / rr, dc = (c - pc) / rc, dz = (z - pz) / rz;
            if (dr * dr + dc * dc + dz * dz > 1.0) continue;
            if (r < 0 || c < 0 || z < 0 || r >= static_cast<long>(s.height) || c >= static_cast<long>(s.width) ||
                z >= static_cast<long>(s.slices)) {
              continue;
            }
            const std::size_t i = p.clean.index(r, c, z);
            if (p.tissue_mask.voxels()[i] == 0.0f) {
              inside = false;
              break;
            }
            voxels.push_back(i);
          }
        }
      }
      if (!inside || voxels.empty()) continue;
      for (std::size_t i : voxels) {
        intensity[i] = lesion_value;
        p.lesion_mask.voxels()[i] = 1.0f;
      }
      placed = true;
    }
    if (!placed) {
      throw PlacementError("could not place lesion " + std::to_string(l) + " inside the tissue mask after " +
                           std::to_string(kPlacementAttempts) + " attempts");
    }
  }

  const double top = *std::max_element(intensity.begin(), intensity.end());
  auto out = p.clean.voxels();
  for (std::size_t i = 0; i < intensity.size(); ++i) {
    out[i] = top > 0.0 ? static_cast<float>(intensity[i] / top) : 0.0f;
  }
  return p;
}

}  // namespace voxdenoise
