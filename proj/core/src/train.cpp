// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <limits>
#include <ostream>
#include <sstream>

#include "voxdenoise/adam.hpp"
#include "voxdenoise/errors.hpp"
#include "voxdenoise/patches.hpp"

namespace voxdenoise {

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954ull;
constexpr std::uint64_t kShuffleStream = 0x53485546ull;

bool has_batch_norm(const ModelConfig& c) { return c.variant != Variant::kMlpMlp; }

std::string param_norms(const Model<float>& model) {
  std::ostringstream out;
  out << std::setprecision(6);
  for (const auto& [name, t] : model.parameters()) {
    double s = 0.0;
    for (float v : t.values()) s += static_cast<double>(v) * v;
    out << "\n  " << name << " l2=" << std::sqrt(s);
  }
  return out.str();
}

std::vector<LossRecord> read_loss_csv(const std::filesystem::path& path, std::size_t through_epoch) {
  std::vector<LossRecord> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    LossRecord r;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (ls >> r.epoch >> c1 >> r.batch >> c2 >> r.loss && r.epoch <= through_epoch) rows.push_back(r);
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::uint64_t init_seed(const TrainConfig& config) { return derive_seed(config.seed, kInitStream, config.model.seed); }

Volume denoise_volume(Model<float>& model, const Volume& noisy, std::size_t stride, std::size_t batch) {
  const auto& mc = model.config();
  if (noisy.slices() != mc.slices || noisy.height() < mc.patch_size || noisy.width() < mc.patch_size) {
    throw DimensionError("volume " + noisy.shape().str() + " does not fit a model with patch size " +
                         std::to_string(mc.patch_size) + " and " + std::to_string(mc.slices) + " slices");
  }
  auto set = patchify(noisy, mc.patch_size, stride, PatchGrid::kCoverEdges);
  const std::size_t d = set.patch_dim();
  batch = std::max<std::size_t>(batch, 1);
  for (std::size_t first = 0; first < set.count(); first += batch) {
    const std::size_t n = std::min(batch, set.count() - first);
    std::vector<float> chunk(set.patches.begin() + static_cast<std::ptrdiff_t>(first * d),
                             set.patches.begin() + static_cast<std::ptrdiff_t>((first + n) * d));
    Tape32 tape;
    const auto out = model.forward(tape, Tensor::from({n, d}, std::move(chunk)), ops::NormMode::kEval);
    std::copy(out.values().begin(), out.values().end(), set.patches.begin() + static_cast<std::ptrdiff_t>(first * d));
  }
  return assemble(set);
}

MetricReport evaluate_model(Model<float>& model, std::span<const VolumePair> pairs, std::size_t stride,
                            std::vector<Volume>* denoised_out) {
  MetricReport report;
  for (const auto& pair : pairs) {
    if (pair.clean.shape() != pair.noisy.shape()) {
      throw DimensionError("volume '" + pair.id + "': clean " + pair.clean.shape().str() + " and noisy " +
                           pair.noisy.shape().str() + " differ");
    }
    const Volume denoised = denoise_volume(model, pair.noisy, stride);
    report.denoised.push_back(measure(pair.id, denoised, pair.clean));
    report.noisy.push_back(measure(pair.id, pair.noisy, pair.clean));
    if (denoised_out) denoised_out->push_back(denoised);
  }
  report.finalize();
  return report;
}

MetricReport evaluate(const Checkpoint& checkpoint, std::span<const VolumePair> pairs) {
  auto model = restore_model(checkpoint);
  return evaluate_model(model, pairs, checkpoint.config.effective_inference_stride());
}

std::string loss_curve_csv(std::span<const LossRecord> losses) {
  std::ostringstream out;
  out << "epoch,batch,loss\n" << std::setprecision(17);
  for (const auto& r : losses) out << r.epoch << ',' << r.batch << ',' << r.loss << '\n';
  return out.str();
}

TrainResult train(const TrainConfig& config, const TrainingData& data, const TrainOptions& options) {
  config.validate();
  const std::size_t n = data.train.size();
  const std::size_t d = config.model.patch_dim();
  if (n == 0) throw ConfigError("training set is empty");
  if (data.train.patch_dim != d) {
    throw DimensionError("training patches have length " + std::to_string(data.train.patch_dim) +
                         ", model expects " + std::to_string(d));
  }
  const std::size_t stride = config.effective_inference_stride();
  const std::uint64_t shuffle_seed = derive_seed(config.seed, kShuffleStream, 0);
  const std::size_t last_epoch = options.stop_after ? std::min(options.stop_after, config.epochs) : config.epochs;

  TrainResult result;
  Model<float> model(config.model);
  AdamState adam;
  std::size_t start = 0;
  if (options.resume) {
    const Checkpoint& ck = *options.resume;
    if (!(ck.config.model == config.model)) throw ConfigError("resume checkpoint was trained with a different model");
    model = restore_model(ck);
    adam = ck.adam;
    start = ck.epoch;
    result.best = ck;
    if (!options.out_dir.empty()) {
      const auto best_path = options.out_dir / "best.ckpt";
      if (std::filesystem::exists(best_path)) result.best = load_checkpoint(best_path);
      result.losses = read_loss_csv(options.out_dir / "loss.csv", start);
    }
  } else {
    model = Model<float>::initialized(config.model, init_seed(config));
    adam = AdamState::for_parameters(model.parameters());
  }
  double best_psnr = options.resume ? options.resume->best_val_psnr : -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = options.resume ? options.resume->best_epoch : 0;
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  const auto make_checkpoint = [&](std::size_t epoch) {
    Checkpoint c = snapshot(model, adam, config, epoch);
    c.best_val_psnr = best_psnr;
    c.best_epoch = best_epoch;
    c.shuffle_seed = shuffle_seed;
    return c;
  };

  auto params = model.parameters();
  const bool bn = has_batch_norm(config.model);
  for (std::size_t epoch = start + 1; epoch <= last_epoch; ++epoch) {
    AdamHyper hyper{config.learning_rate, config.beta1, config.beta2, config.adam_eps};
    if (options.lr_schedule) hyper.learning_rate = options.lr_schedule(epoch, config.learning_rate);

    const auto perm = epoch_permutation(n, shuffle_seed, epoch);
    double weighted = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < n; first += config.batch_size, ++batch_index) {
      const std::size_t b = std::min(config.batch_size, n - first);
      // Batch statistics are undefined for a single sample.
      if (bn && b < 2) break;
      std::vector<float> x(b * d), y(b * d);
      for (std::size_t i = 0; i < b; ++i) {
        const auto np = data.train.noisy_patch(perm[first + i]);
        const auto cp = data.train.clean_patch(perm[first + i]);
        std::copy(np.begin(), np.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d));
        std::copy(cp.begin(), cp.end(), y.begin() + static_cast<std::ptrdiff_t>(i * d));
      }
      for (auto& [name, p] : params) p.zero_grad();
      Tape32 tape;
      const auto pred = model.forward(tape, Tensor::from({b, d}, std::move(x)), ops::NormMode::kTrain);
      const auto loss = ops::mse_loss(tape, pred, Tensor::from({b, d}, std::move(y)));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite training loss " + std::to_string(value) + " at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                           "; parameter norms:" + param_norms(model));
      }
      tape.backward(loss);
      adam_step(params, adam, hyper);
      result.losses.push_back({epoch, batch_index, value});
      weighted += value * static_cast<double>(b);
      seen += b;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = seen ? weighted / static_cast<double>(seen) : 0.0;
    rec.learning_rate = hyper.learning_rate;
    rec.val_psnr = rec.val_ssim = std::numeric_limits<double>::quiet_NaN();
    if (!data.val.empty()) {
      const auto report = evaluate_model(model, data.val, stride);
      rec.val_psnr = report.denoised_mean.psnr;
      rec.val_ssim = report.denoised_mean.ssim;
    }
    const bool improved = data.val.empty() || rec.val_psnr > best_psnr || best_epoch == 0;
    if (improved) {
      if (!data.val.empty()) best_psnr = rec.val_psnr;
      best_epoch = epoch;
    }
    result.last = make_checkpoint(epoch);
    if (improved) result.best = result.last;
    result.epochs.push_back(rec);

    if (!options.out_dir.empty()) {
      if (epoch % config.checkpoint_every == 0 || epoch == last_epoch) {
        save_checkpoint(result.last, options.out_dir / "last.ckpt");
      }
      if (improved) save_checkpoint(result.best, options.out_dir / "best.ckpt");
      write_text(options.out_dir / "loss.csv", loss_curve_csv(result.losses));
    }
    if (options.log) {
      *options.log << "epoch " << epoch << "/" << config.epochs << " loss " << std::setprecision(6)
                   << rec.train_loss << " val_psnr " << rec.val_psnr << " val_ssim " << rec.val_ssim
                   << (improved ? " *" : "") << std::endl;
    }
    if (options.on_epoch) options.on_epoch(rec);
  }
  if (result.epochs.empty()) {
    result.last = make_checkpoint(start);
    if (!options.resume) result.best = result.last;
  }
  return result;
}

std::string AblationTable::to_json() const {
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  const auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return format_metric(v);
  };
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["model"] = display_name(r.variant);
    row["PSNR"] = num(r.psnr);
    row["SSIM"] = num(r.ssim);
    row["first_epoch_loss"] = num(r.first_epoch_loss);
    row["final_epoch_loss"] = num(r.final_epoch_loss);
    row["converged"] = r.converged;
    row["train_seconds"] = r.train_seconds;
    if (!r.error.empty()) row["error"] = r.error;
    rows_json.push_back(row);
  }
  nlohmann::ordered_json out;
  out["split"] = "val";
  out["columns"] = {"model", "PSNR", "SSIM"};
  out["rows"] = rows_json;
  out["hybrid_best"] = hybrid_best;
  return out.dump(2) + "\n";
}

std::string AblationTable::to_markdown() const {
  std::ostringstream out;
  out << "Validation-split means of each variant's best checkpoint.\n\n"
      << "| model | PSNR | SSIM | converged | train s |\n|---|---|---|---|---|\n" << std::fixed;
  for (const auto& r : rows) {
    out << "| " << display_name(r.variant) << " | " << std::setprecision(4) << r.psnr << " | " << r.ssim << " | "
        << (r.converged ? "yes" : "NO") << " | " << std::setprecision(1) << r.train_seconds << " |\n";
  }
  out << "\nMLP+CNN best: " << (hybrid_best ? "yes" : "no") << "\n";
  return out.str();
}

AblationTable ablate(const TrainConfig& base, const TrainingData& data, std::ostream* log,
                     const AblationCallback& on_result) {
  AblationTable table;
  for (Variant v : {Variant::kMlpMlp, Variant::kCnnCnn, Variant::kMlpCnn}) {
    TrainConfig config = base;
    config.model.variant = v;
    AblationRow row;
    row.variant = v;
    try {
      TrainOptions opts;
      opts.log = log;
      if (log) *log << "== " << display_name(v) << " ==" << std::endl;
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = train(config, data, opts);
      row.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (on_result) on_result(v, result);
      if (!result.epochs.empty()) {
        row.first_epoch_loss = result.epochs.front().train_loss;
        row.final_epoch_loss = result.epochs.back().train_loss;
        row.converged = row.final_epoch_loss < 0.5 * row.first_epoch_loss;
      }
      const auto report = evaluate(result.best, data.val);
      row.psnr = report.denoised_mean.psnr;
      row.ssim = report.denoised_mean.ssim;
    } catch (const NumericError& e) {
      row.error = e.what();
      row.converged = false;
      row.psnr = row.ssim = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(row);
  }
  const double hybrid = table.rows[2].psnr;
  table.hybrid_best = hybrid > table.rows[0].psnr && hybrid > table.rows[1].psnr;
  return table;
}

}  // namespace voxdenoise
