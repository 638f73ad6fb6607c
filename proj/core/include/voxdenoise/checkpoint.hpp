// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voxdenoise/adam.hpp"
#include "voxdenoise/config.hpp"
#include "voxdenoise/model.hpp"

namespace voxdenoise {

/// Complete training state after `epoch` finished epochs.
///
/// File layout: magic "CKPT", u32-LE manifest length, JSON manifest, then the
/// little-endian f32 payloads of every tensor listed in the manifest, each at
/// its recorded byte offset from the start of the payload.
struct Checkpoint {
  TrainConfig config;
  std::size_t epoch = 0;
  std::vector<std::pair<std::string, Tensor>> parameters;
  std::vector<std::pair<std::string, ops::RunningStats<float>>> buffers;
  AdamState adam;
  double best_val_psnr = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  /// Seed of the per-epoch shuffle stream; with `epoch` it fixes the next
  /// permutation.
  std::uint64_t shuffle_seed = 0;
};

/// Deep-copies the model parameters, running statistics and optimizer state.
Checkpoint snapshot(const Model<float>& model, const AdamState& adam, const TrainConfig& config, std::size_t epoch);

/// Rebuilds the model described by `checkpoint.config.model` and loads its
/// tensors. Throws DimensionError when names or shapes disagree.
Model<float> restore_model(const Checkpoint& checkpoint);

std::vector<unsigned char> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::span<const unsigned char> bytes, const std::string& origin = "<memory>");

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace voxdenoise
