// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voxdenoise/config.hpp"
#include "voxdenoise/patches.hpp"
#include "voxdenoise/phantom.hpp"
#include "voxdenoise/volume.hpp"

namespace voxdenoise {

/// Volume identifiers per split. Splits are by whole volume and disjoint.
struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  void validate() const;
};

/// Takes the first n_train ids for training, the next n_val for validation
/// and the next n_test for testing.
DatasetSplit split_by_volume(std::span<const std::string> ids, std::size_t n_train, std::size_t n_val,
                             std::size_t n_test);

struct NamedVolume {
  std::string id;
  Volume volume;
};

struct VolumePair {
  std::string id;
  Volume clean;
  Volume noisy;
};

/// Aligned noisy/clean patch pairs, stored back to back.
struct PatchPairs {
  std::size_t patch_size = 0;
  std::size_t patch_dim = 0;
  std::vector<float> noisy;
  std::vector<float> clean;
  std::vector<PatchOrigin> origins;
  std::vector<std::size_t> source;  // index of the originating volume pair

  std::size_t size() const { return origins.size(); }
  std::span<const float> noisy_patch(std::size_t i) const {
    return std::span<const float>(noisy).subspan(i * patch_dim, patch_dim);
  }
  std::span<const float> clean_patch(std::size_t i) const {
    return std::span<const float>(clean).subspan(i * patch_dim, patch_dim);
  }
};

PatchPairs build_patch_dataset(std::span<const VolumePair> pairs, std::size_t patch_size, std::size_t stride);

/// splitmix64-based derivation of independent stream seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

/// Seeded Fisher-Yates permutation of [0, n) for a given epoch.
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch);

/// Seed of phantom `index` in a generated set.
std::uint64_t phantom_seed(std::uint64_t seed, std::size_t index);

/// `count` phantoms named phantom_000, phantom_001, ... with seeds derived
/// from `seed`.
std::vector<NamedVolume> generate_phantom_set(std::size_t count, const PhantomSpec& base, std::uint64_t seed);

/// Everything a training run consumes: patch pairs from the training volumes,
/// whole noisy/clean validation and test volumes.
struct TrainingData {
  DatasetSplit split;
  PatchPairs train;
  std::vector<VolumePair> val;
  std::vector<VolumePair> test;
};

/// Splits `clean` by volume, noises each volume (one seed stream per volume)
/// and cuts the training volumes into patches.
TrainingData prepare_training_data(const TrainConfig& config, std::span<const NamedVolume> clean);

/// Noise seed used for volume `index` of a split.
std::uint64_t noise_seed(std::uint64_t base, std::size_t split, std::size_t index);

}  // namespace voxdenoise
