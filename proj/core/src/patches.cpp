// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/patches.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

std::vector<std::size_t> grid_starts(std::size_t extent, std::size_t patch_size, std::size_t stride,
                                     PatchGrid grid) {
  if (patch_size == 0 || stride == 0) throw ConfigError("patch size and stride must be positive");
  if (extent < patch_size) {
    throw DimensionError("volume extent " + std::to_string(extent) + " is smaller than patch size " +
                         std::to_string(patch_size));
  }
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + patch_size <= extent; s += stride) starts.push_back(s);
  if (grid == PatchGrid::kCoverEdges && starts.back() + patch_size < extent) {
    starts.push_back(extent - patch_size);
  }
  return starts;
}

PatchSet patchify(const Volume& volume, std::size_t patch_size, std::size_t stride, PatchGrid grid) {
  const auto rows = grid_starts(volume.height(), patch_size, stride, grid);
  const auto cols = grid_starts(volume.width(), patch_size, stride, grid);
  PatchSet set;
  set.patch_size = patch_size;
  set.source_shape = volume.shape();
  set.origins.reserve(rows.size() * cols.size());
  const std::size_t C = volume.slices();
  const std::size_t run = patch_size * C;  // contiguous span of one patch row
  set.patches.resize(rows.size() * cols.size() * set.patch_dim());
  auto src = volume.voxels();
  float* dst = set.patches.data();
  for (std::size_t r0 : rows) {
    for (std::size_t c0 : cols) {
      set.origins.push_back({r0, c0});
      for (std::size_t r = 0; r < patch_size; ++r) {
        const auto begin = src.begin() + static_cast<std::ptrdiff_t>(volume.index(r0 + r, c0, 0));
        dst = std::copy(begin, begin + static_cast<std::ptrdiff_t>(run), dst);
      }
    }
  }
  return set;
}

Volume assemble(const PatchSet& set) {
  const VolumeShape shape = set.source_shape;
  const std::size_t P = set.patch_size;
  const std::size_t C = shape.slices;
  if (set.patches.size() != set.count() * set.patch_dim()) {
    throw DimensionError("patch buffer holds " + std::to_string(set.patches.size()) + " values for " +
                         std::to_string(set.count()) + " patches of " + std::to_string(set.patch_dim()));
  }
  std::vector<double> sums(shape.voxels(), 0.0);
  std::vector<std::uint32_t> counts(shape.voxels(), 0);
  for (std::size_t k = 0; k < set.count(); ++k) {
    const auto [r0, c0] = set.origins[k];
    if (r0 + P > shape.height || c0 + P > shape.width) {
      throw DimensionError("patch origin (" + std::to_string(r0) + ", " + std::to_string(c0) +
                           ") runs past volume " + shape.str());
    }
    const auto patch = set.patch(k);
    for (std::size_t r = 0; r < P; ++r) {
      for (std::size_t c = 0; c < P; ++c) {
        const std::size_t base = ((r0 + r) * shape.width + (c0 + c)) * C;
        for (std::size_t z = 0; z < C; ++z) {
          sums[base + z] += patch[(r * P + c) * C + z];
          ++counts[base + z];
        }
      }
    }
  }
  Volume out(shape);
  auto voxels = out.voxels();
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    if (counts[i] == 0) {
      const std::size_t row = i / (shape.width * C);
      const std::size_t col = (i / C) % shape.width;
      throw CoverageError("voxel (" + std::to_string(row) + ", " + std::to_string(col) + ", " +
                          std::to_string(i % C) + ") is not covered by any patch");
    }
    voxels[i] = static_cast<float>(sums[i] / counts[i]);
  }
  return out;
}

}  // namespace voxdenoise
