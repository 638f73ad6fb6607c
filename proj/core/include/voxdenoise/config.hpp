// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voxdenoise/model.hpp"

namespace voxdenoise {

struct TrainConfig {
  ModelConfig model = ModelConfig::desk_scale();
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  double noise_level = 0.15;
  /// When true, volume i is noised at mixed_levels[i % size] instead of noise_level.
  bool mixed_levels = false;
  std::vector<double> mixed_noise_levels{0.03, 0.09, 0.15};
  std::size_t patch_stride = 10;
  std::size_t inference_stride = 0;  // 0: same as patch_stride
  std::size_t checkpoint_every = 1;  // epochs between "last" checkpoints
  std::size_t n_train = 20;
  std::size_t n_val = 5;
  std::size_t n_test = 5;
  bool deterministic = true;

  std::size_t effective_inference_stride() const { return inference_stride ? inference_stride : patch_stride; }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;

  /// 20/5/5 phantoms, 15% noise, L=2, J=2, channels [16, 32], batch 32,
  /// 50 epochs, lr 5e-4.
  static TrainConfig desk_scale();
};

/// JSON using the field names above; model fields nest under "model".
std::string to_json(const ModelConfig& config);
std::string to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const std::string& json);
TrainConfig train_config_from_json(const std::string& json);
TrainConfig load_train_config(const std::filesystem::path& path);

}  // namespace voxdenoise
