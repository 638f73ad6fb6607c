// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "voxdenoise/volume.hpp"

namespace voxdenoise {

struct PatchOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const PatchOrigin&) const = default;
};

enum class PatchGrid {
  /// start in {0, s, 2s, ...} while start + P <= dim.
  kStrided,
  /// The strided grid plus a final start at dim - P when the strided grid
  /// stops short of the far edge. Used for full-volume inference.
  kCoverEdges,
};

/// K flattened P x P x C patches (each row-major over row, col, slice), their
/// origins, and the shape of the volume they came from.
struct PatchSet {
  std::size_t patch_size = 0;
  VolumeShape source_shape;
  std::vector<PatchOrigin> origins;
  std::vector<float> patches;  // K * patch_dim()

  std::size_t count() const { return origins.size(); }
  std::size_t patch_dim() const { return patch_size * patch_size * source_shape.slices; }
  std::span<const float> patch(std::size_t k) const {
    return std::span<const float>(patches).subspan(k * patch_dim(), patch_dim());
  }
  std::span<float> patch(std::size_t k) { return std::span<float>(patches).subspan(k * patch_dim(), patch_dim()); }
};

/// Start offsets along one axis of length `extent`.
std::vector<std::size_t> grid_starts(std::size_t extent, std::size_t patch_size, std::size_t stride,
                                     PatchGrid grid = PatchGrid::kStrided);

PatchSet patchify(const Volume& volume, std::size_t patch_size, std::size_t stride,
                  PatchGrid grid = PatchGrid::kStrided);

/// Averages overlapping patches voxel-wise. Throws CoverageError if any voxel
/// is covered by no patch.
Volume assemble(const PatchSet& patches);

}  // namespace voxdenoise
