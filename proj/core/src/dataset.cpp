// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "voxdenoise/errors.hpp"
#include "voxdenoise/noise.hpp"

namespace voxdenoise {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform draw from [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::uint64_t& state, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  while (true) {
    state = splitmix64(state);
    if (state < limit) return state % bound;
  }
}

}  // namespace

void DatasetSplit::validate() const {
  std::set<std::string> seen;
  for (const auto* part : {&train, &val, &test}) {
    for (const auto& id : *part) {
      if (!seen.insert(id).second) throw ConfigError("volume '" + id + "' appears in more than one split");
    }
  }
}

DatasetSplit split_by_volume(std::span<const std::string> ids, std::size_t n_train, std::size_t n_val,
                             std::size_t n_test) {
  if (n_train + n_val + n_test > ids.size()) {
    throw ConfigError("split needs " + std::to_string(n_train + n_val + n_test) + " volumes, only " +
                      std::to_string(ids.size()) + " available");
  }
  DatasetSplit s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
               ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val + n_test));
  s.validate();
  return s;
}

PatchPairs build_patch_dataset(std::span<const VolumePair> pairs, std::size_t patch_size, std::size_t stride) {
  PatchPairs out;
  out.patch_size = patch_size;
  for (std::size_t v = 0; v < pairs.size(); ++v) {
    const auto& pair = pairs[v];
    if (pair.clean.shape() != pair.noisy.shape()) {
      throw DimensionError("volume '" + pair.id + "': clean " + pair.clean.shape().str() + " and noisy " +
                           pair.noisy.shape().str() + " differ");
    }
    const auto clean = patchify(pair.clean, patch_size, stride);
    const auto noisy = patchify(pair.noisy, patch_size, stride);
    if (out.patch_dim == 0) {
      out.patch_dim = clean.patch_dim();
    } else if (out.patch_dim != clean.patch_dim()) {
      throw DimensionError("volume '" + pair.id + "' has a different slice count from earlier volumes");
    }
    out.clean.insert(out.clean.end(), clean.patches.begin(), clean.patches.end());
    out.noisy.insert(out.noisy.end(), noisy.patches.begin(), noisy.patches.end());
    out.origins.insert(out.origins.end(), clean.origins.begin(), clean.origins.end());
    out.source.insert(out.source.end(), clean.count(), v);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

std::uint64_t noise_seed(std::uint64_t base, std::size_t split, std::size_t index) {
  return derive_seed(base, 0x4e4f495345ull + split, index);
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::uint64_t state = derive_seed(seed, 0x5348554646ull, epoch);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(state, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::uint64_t phantom_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, 0x5048414e54ull, index);
}

std::vector<NamedVolume> generate_phantom_set(std::size_t count, const PhantomSpec& base, std::uint64_t seed) {
  std::vector<NamedVolume> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PhantomSpec spec = base;
    spec.seed = phantom_seed(seed, i);
    char name[32];
    std::snprintf(name, sizeof name, "phantom_%03zu", i);
    out.push_back({name, generate_phantom(spec).clean});
  }
  return out;
}

TrainingData prepare_training_data(const TrainConfig& config, std::span<const NamedVolume> clean) {
  config.validate();
  std::vector<std::string> ids;
  for (const auto& v : clean) ids.push_back(v.id);
  TrainingData data;
  data.split = split_by_volume(ids, config.n_train, config.n_val, config.n_test);

  const auto level_for = [&](std::size_t i) {
    return config.mixed_levels ? config.mixed_noise_levels[i % config.mixed_noise_levels.size()]
                               : config.noise_level;
  };
  std::vector<VolumePair> train_pairs;
  const std::size_t offsets[3] = {0, config.n_train, config.n_train + config.n_val};
  const std::size_t counts[3] = {config.n_train, config.n_val, config.n_test};
  std::vector<VolumePair>* dest[3] = {&train_pairs, &data.val, &data.test};
  for (std::size_t split = 0; split < 3; ++split) {
    for (std::size_t i = 0; i < counts[split]; ++i) {
      const auto& src = clean[offsets[split] + i];
      if (src.volume.slices() != config.model.slices) {
        throw ConfigError("volume '" + src.id + "' has " + std::to_string(src.volume.slices()) +
                          " slices, model expects " + std::to_string(config.model.slices));
      }
      const NoiseSpec spec{level_for(i), noise_seed(config.seed, split, i)};
      dest[split]->push_back({src.id, src.volume, add_rician(src.volume, spec)});
    }
  }
  data.train = build_patch_dataset(train_pairs, config.model.patch_size, config.patch_stride);
  return data;
}

}  // namespace voxdenoise
