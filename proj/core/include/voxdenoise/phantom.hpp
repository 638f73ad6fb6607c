// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "voxdenoise/volume.hpp"

namespace voxdenoise {

/// Synthetic FLAIR-like head phantom: smooth tissue inside an ellipsoidal
/// mask with a darker central ventricle, plus small bright ellipsoidal
/// lesions.
struct PhantomSpec {
  VolumeShape shape{64, 64, 6};
  double smoothness = 4.0;  // Gaussian sigma of the background field, voxels
  std::size_t n_lesions = 6;
  double lesion_radius_min = 1.0;
  double lesion_radius_max = 3.0;
  double lesion_contrast = 1.5;  // lesion intensity / brightest background voxel
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  Volume clean;         // intensities in [0, 1]
  Volume lesion_mask;   // 1 inside lesions, 0 elsewhere
  Volume tissue_mask;   // 1 inside the head ellipsoid
};

Phantom generate_phantom(const PhantomSpec& spec);

}  // namespace voxdenoise
