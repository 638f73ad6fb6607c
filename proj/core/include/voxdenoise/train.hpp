// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxdenoise/checkpoint.hpp"
#include "voxdenoise/config.hpp"
#include "voxdenoise/dataset.hpp"
#include "voxdenoise/metrics.hpp"
#include "voxdenoise/model.hpp"

namespace voxdenoise {

struct LossRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t batch = 0;  // 0-based within the epoch
  double loss = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // sample-weighted mean over the epoch's batches
  double learning_rate = 0.0;
  double val_psnr = 0.0;  // NaN when there is no validation split
  double val_ssim = 0.0;
};

struct TrainOptions {
  /// Directory for last.ckpt, best.ckpt and loss.csv. Empty: nothing is written.
  std::filesystem::path out_dir;
  /// Continue from this state instead of a fresh initialisation.
  std::optional<Checkpoint> resume;
  /// Stop once this many epochs have finished (0: run config.epochs).
  std::size_t stop_after = 0;
  /// Learning rate for a 1-based epoch; constant when unset.
  std::function<double(std::size_t epoch, double base)> lr_schedule;
  std::function<void(const EpochRecord&)> on_epoch;
  std::ostream* log = nullptr;
};

struct TrainResult {
  Checkpoint last;
  Checkpoint best;  // highest validation PSNR; equals `last` without validation data
  std::vector<LossRecord> losses;
  std::vector<EpochRecord> epochs;
};

/// Seed of the initial weights for a run.
std::uint64_t init_seed(const TrainConfig& config);

/// Minibatch Adam on the mean-squared error between predicted and clean
/// patches, shuffled by a per-epoch permutation. Throws NumericError when a
/// loss turns non-finite.
TrainResult train(const TrainConfig& config, const TrainingData& data, const TrainOptions& options = {});

/// Denoises a whole volume: edge-covering patch grid at `stride`, eval-mode
/// forward in chunks of `batch`, overlap-averaged reassembly.
Volume denoise_volume(Model<float>& model, const Volume& noisy, std::size_t stride, std::size_t batch = 64);

/// `denoised`, when given, receives the reconstructed volumes in pair order.
MetricReport evaluate_model(Model<float>& model, std::span<const VolumePair> pairs, std::size_t stride,
                            std::vector<Volume>* denoised = nullptr);
/// Throws DimensionError when a volume does not fit the checkpoint's model.
MetricReport evaluate(const Checkpoint& checkpoint, std::span<const VolumePair> pairs);

/// "epoch,batch,loss" with one row per minibatch.
std::string loss_curve_csv(std::span<const LossRecord> losses);

struct AblationRow {
  Variant variant = Variant::kMlpCnn;
  double psnr = 0.0;
  double ssim = 0.0;
  double first_epoch_loss = 0.0;
  double final_epoch_loss = 0.0;
  /// final_epoch_loss < 0.5 * first_epoch_loss
  bool converged = false;
  double train_seconds = 0.0;
  std::string error;  // set when training aborted
};

struct AblationTable {
  std::vector<AblationRow> rows;  // MLP+MLP, CNN+CNN, MLP+CNN
  /// Whether MLP+CNN has the highest PSNR of the three.
  bool hybrid_best = false;

  std::string to_json() const;
  std::string to_markdown() const;
};

using AblationCallback = std::function<void(Variant, const TrainResult&)>;

/// Trains every variant with the same seed and data, scoring each best
/// checkpoint on the validation volumes. `on_result` sees every finished run.
AblationTable ablate(const TrainConfig& base, const TrainingData& data, std::ostream* log = nullptr,
                     const AblationCallback& on_result = {});

}  // namespace voxdenoise
