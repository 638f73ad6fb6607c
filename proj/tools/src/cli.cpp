// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <regex>

#include "voxdenoise/checkpoint.hpp"
#include "voxdenoise/config.hpp"
#include "voxdenoise/dataset.hpp"
#include "voxdenoise/errors.hpp"
#include "voxdenoise/metrics.hpp"
#include "voxdenoise/noise.hpp"
#include "voxdenoise/phantom.hpp"
#include "voxdenoise/train.hpp"
#include "voxdenoise/volume.hpp"
#include "voxdenoise_cli/png.hpp"

#ifndef VOXDENOISE_VERSION
#define VOXDENOISE_VERSION "0.0.0"
#endif

namespace voxdenoise::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class RunManifest {
 public:
  explicit RunManifest(std::string subcommand) : start_(std::chrono::steady_clock::now()) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["tool_version"] = VOXDENOISE_VERSION;
    doc_["inputs"] = Json::object();
    doc_["outputs"] = Json::array();
  }

  Json& operator[](const char* key) { return doc_[key]; }
  void input(const char* key, const fs::path& p) { doc_["inputs"][key] = p.string(); }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }

  void write(const fs::path& path) {
    doc_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << doc_.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }

 private:
  Json doc_;
  std::chrono::steady_clock::time_point start_;
};

fs::path beside(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

VolumeShape parse_shape(const std::string& text) {
  static const std::regex re(R"((\d+)[xX,](\d+)[xX,](\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("--shape must look like HxWxC, got '" + text + "'");
  VolumeShape s{std::stoul(m[1]), std::stoul(m[2]), std::stoul(m[3])};
  if (s.voxels() == 0) throw ConfigError("--shape has a zero dimension: '" + text + "'");
  return s;
}

/// Clean volumes in `dir`, sorted by file name; lesion masks are skipped.
std::vector<NamedVolume> read_volume_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".vol" && !name.ends_with("_mask.vol")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedVolume> out;
  for (const auto& f : files) out.push_back({f.stem().string(), load_volume(f)});
  return out;
}

Json config_json(const TrainConfig& c) { return Json::parse(to_json(c)); }

std::uint8_t to_gray(float v, double lo, double hi) {
  const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
  return static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
}

// Per slice: clean | noisy | denoised side by side, windowed to the clean
// volume's range.
Json write_triptychs(const fs::path& dir, const VolumePair& pair, const Volume& denoised) {
  const double lo = pair.clean.min(), hi = pair.clean.max();
  const std::size_t h = pair.clean.height(), w = pair.clean.width();
  Json files = Json::array();
  for (std::size_t z = 0; z < pair.clean.slices(); ++z) {
    std::vector<std::uint8_t> px(3 * w * h);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        px[r * 3 * w + c] = to_gray(pair.clean.at(r, c, z), lo, hi);
        px[r * 3 * w + w + c] = to_gray(pair.noisy.at(r, c, z), lo, hi);
        px[r * 3 * w + 2 * w + c] = to_gray(denoised.at(r, c, z), lo, hi);
      }
    }
    char name[64];
    std::snprintf(name, sizeof name, "_slice%02zu.png", z);
    const auto path = dir / (pair.id + name);
    write_gray_png(path, px, static_cast<std::uint32_t>(3 * w), static_cast<std::uint32_t>(h));
    files.push_back(path.string());
  }
  return {{"volume", pair.id}, {"window_min", lo}, {"window_max", hi}, {"files", files}};
}

struct TrainFlags {
  std::optional<std::size_t> epochs, batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate, noise_level;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "Override the config's epoch count");
    cmd->add_option("--batch-size", batch_size, "Override the config's batch size");
    cmd->add_option("--seed", seed, "Override the config's seed");
    cmd->add_option("--learning-rate", learning_rate, "Override the config's learning rate");
    cmd->add_option("--noise-level", noise_level, "Override the config's noise level");
  }
  TrainConfig apply(TrainConfig c) const {
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (seed) c.seed = *seed;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (noise_level) c.noise_level = *noise_level;
    c.validate();
    return c;
  }
};

TrainConfig resolve_config(const std::string& path, const TrainFlags& flags) {
  TrainConfig c = path.empty() ? TrainConfig::desk_scale() : load_train_config(path);
  return flags.apply(c);
}

int map_error(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitIo;
  return kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volumetric MR patch denoiser", "voxdenoise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VOXDENOISE_VERSION);
  std::function<void()> action;

  // generate-phantoms
  std::size_t count = 0, lesions = 6;
  std::string shape_text = "64x64x6";
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* gen = app.add_subcommand("generate-phantoms", "Write synthetic clean volumes and lesion masks");
  gen->add_option("--count", count, "Number of phantoms")->required();
  gen->add_option("--shape", shape_text, "HxWxC")->capture_default_str();
  gen->add_option("--lesions", lesions, "Lesions per phantom")->capture_default_str();
  gen->add_option("--seed", seed, "Base seed")->capture_default_str();
  gen->add_option("--out-dir", out_dir, "Output directory")->required();
  gen->callback([&] {
    action = [&] {
      PhantomSpec spec;
      spec.shape = parse_shape(shape_text);
      spec.n_lesions = lesions;
      spec.validate();
      ensure_dir(out_dir);
      RunManifest manifest("generate-phantoms");
      manifest["seed"] = seed;
      manifest["config"] = {{"count", count}, {"shape", spec.shape.str()}, {"lesions", lesions}};
      for (std::size_t i = 0; i < count; ++i) {
        spec.seed = phantom_seed(seed, i);
        const auto ph = generate_phantom(spec);
        char name[32];
        std::snprintf(name, sizeof name, "phantom_%03zu", i);
        const auto clean = fs::path(out_dir) / (std::string(name) + ".vol");
        const auto mask = fs::path(out_dir) / (std::string(name) + "_mask.vol");
        save_volume(ph.clean, clean);
        save_volume(ph.lesion_mask, mask);
        manifest.output(clean);
        manifest.output(mask);
      }
      manifest.write(fs::path(out_dir) / "manifest.json");
      out << "wrote " << count << " phantoms to " << out_dir << '\n';
    };
  });

  // add-noise
  std::string in_path, out_path;
  double level = 0.0;
  auto* noise = app.add_subcommand("add-noise", "Corrupt a volume with Rician noise");
  noise->add_option("--in", in_path, "Clean volume")->required();
  noise->add_option("--level", level, "Noise level as a fraction of the volume maximum")->required();
  noise->add_option("--seed", seed, "Noise seed")->capture_default_str();
  noise->add_option("--out", out_path, "Noisy volume")->required();
  noise->callback([&] {
    action = [&] {
      if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("--level must lie in [0, 1], got " + std::to_string(level));
      const Volume clean = load_volume(in_path);
      const Volume noisy = add_rician(clean, {level, seed});
      ensure_parent(out_path);
      save_volume(noisy, out_path);
      RunManifest manifest("add-noise");
      manifest["seed"] = seed;
      manifest["config"] = {{"level", level}};
      manifest.input("in", in_path);
      manifest.output(out_path);
      manifest.write(beside(out_path));
    };
  });

  // train
  std::string config_path, data_dir;
  bool resume = false;
  TrainFlags train_flags;
  auto* tr = app.add_subcommand("train", "Train a denoiser on a directory of clean volumes");
  tr->add_option("--config", config_path, "TrainConfig JSON (desk-scale defaults when omitted)");
  tr->add_option("--data-dir", data_dir, "Directory of clean .vol files")->required();
  tr->add_option("--out-dir", out_dir, "Checkpoint and log directory")->required();
  tr->add_flag("--resume", resume, "Continue from OUT_DIR/last.ckpt");
  train_flags.add_to(tr);
  tr->callback([&] {
    action = [&] {
      const TrainConfig config = resolve_config(config_path, train_flags);
      const auto volumes = read_volume_dir(data_dir);
      const TrainingData data = prepare_training_data(config, volumes);
      ensure_dir(out_dir);
      TrainOptions opts;
      opts.out_dir = out_dir;
      opts.log = &out;
      if (resume) opts.resume = load_checkpoint(fs::path(out_dir) / "last.ckpt");
      const auto result = train(config, data, opts);

      const auto epochs_path = fs::path(out_dir) / "epochs.csv";
      std::string epochs_csv;
      if (!resume || !fs::exists(epochs_path)) epochs_csv = "epoch,train_loss,learning_rate,val_psnr,val_ssim\n";
      for (const auto& e : result.epochs) {
        char row[160];
        std::snprintf(row, sizeof row, "%zu,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.train_loss, e.learning_rate,
                      e.val_psnr, e.val_ssim);
        epochs_csv += row;
      }
      {
        std::ofstream f(epochs_path, std::ios::binary | (resume ? std::ios::app : std::ios::trunc));
        f << epochs_csv;
        if (!f) throw IoError("failed writing '" + epochs_path.string() + "'");
      }

      RunManifest manifest("train");
      manifest["seed"] = config.seed;
      manifest["config"] = config_json(config);
      manifest["split"] = {{"train", data.split.train}, {"val", data.split.val}, {"test", data.split.test}};
      manifest["best_epoch"] = result.best.epoch;
      manifest["best_val_psnr"] = result.best.best_val_psnr;
      manifest.input("data_dir", data_dir);
      if (!config_path.empty()) manifest.input("config", config_path);
      for (const char* f : {"last.ckpt", "best.ckpt", "loss.csv", "epochs.csv"}) manifest.output(fs::path(out_dir) / f);
      manifest.write(fs::path(out_dir) / "manifest.json");
    };
  });

  // denoise
  std::string checkpoint_path;
  std::size_t stride = 0;
  auto* den = app.add_subcommand("denoise", "Denoise one volume with a trained checkpoint");
  den->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  den->add_option("--in", in_path, "Noisy volume")->required();
  den->add_option("--out", out_path, "Denoised volume")->required();
  den->add_option("--stride", stride, "Inference stride (default: the checkpoint's)");
  den->callback([&] {
    action = [&] {
      const auto ck = load_checkpoint(checkpoint_path);
      const Volume noisy = load_volume(in_path);
      auto model = restore_model(ck);
      const std::size_t s = stride ? stride : ck.config.effective_inference_stride();
      const Volume denoised = denoise_volume(model, noisy, s);
      ensure_parent(out_path);
      save_volume(denoised, out_path);
      RunManifest manifest("denoise");
      manifest["seed"] = ck.config.seed;
      manifest["config"] = {{"stride", s}, {"checkpoint_epoch", ck.epoch}};
      manifest.input("checkpoint", checkpoint_path);
      manifest.input("in", in_path);
      manifest.output(out_path);
      manifest.write(beside(out_path));
    };
  });

  // evaluate
  std::string clean_dir, noisy_dir, report_path, png_dir;
  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint on noisy/clean volume pairs");
  ev->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  ev->add_option("--clean-dir", clean_dir, "Directory of clean .vol files")->required();
  ev->add_option("--noisy-dir", noisy_dir, "Directory of noisy .vol files with matching names")->required();
  ev->add_option("--report", report_path, "JSON metric report")->required();
  ev->add_option("--png-dir", png_dir, "Write clean | noisy | denoised slice triptychs here");
  ev->callback([&] {
    action = [&] {
      const auto ck = load_checkpoint(checkpoint_path);
      std::vector<VolumePair> pairs;
      for (auto& nv : read_volume_dir(noisy_dir)) {
        const auto clean_file = fs::path(clean_dir) / (nv.id + ".vol");
        if (!fs::exists(clean_file)) throw IoError("no clean volume '" + clean_file.string() + "' for " + nv.id);
        pairs.push_back({nv.id, load_volume(clean_file), std::move(nv.volume)});
      }
      if (pairs.empty()) throw IoError("no .vol files in '" + noisy_dir + "'");
      auto model = restore_model(ck);
      std::vector<Volume> denoised;
      const auto report = evaluate_model(model, pairs, ck.config.effective_inference_stride(), &denoised);
      ensure_parent(report_path);
      write_text(report_path, report.to_json());

      RunManifest manifest("evaluate");
      manifest["seed"] = ck.config.seed;
      manifest["config"] = {{"stride", ck.config.effective_inference_stride()}, {"checkpoint_epoch", ck.epoch}};
      manifest.input("checkpoint", checkpoint_path);
      manifest.input("clean_dir", clean_dir);
      manifest.input("noisy_dir", noisy_dir);
      manifest.output(report_path);
      if (!png_dir.empty()) {
        ensure_dir(png_dir);
        Json figures = Json::array();
        for (std::size_t i = 0; i < pairs.size(); ++i) figures.push_back(write_triptychs(png_dir, pairs[i], denoised[i]));
        manifest["png"] = figures;
      }
      manifest.write(beside(report_path));
      out << "mean PSNR " << format_metric(report.denoised_mean.psnr) << " (noisy "
          << format_metric(report.noisy_mean.psnr) << "), mean SSIM " << format_metric(report.denoised_mean.ssim)
          << " (noisy " << format_metric(report.noisy_mean.ssim) << ")\n";
    };
  });

  // ablate
  TrainFlags ablate_flags;
  auto* ab = app.add_subcommand("ablate", "Train and compare MLP+MLP, CNN+CNN and MLP+CNN");
  ab->add_option("--config", config_path, "TrainConfig JSON (desk-scale defaults when omitted)");
  ab->add_option("--data-dir", data_dir, "Directory of clean .vol files")->required();
  ab->add_option("--report", report_path, "JSON table; a Markdown copy is written beside it")->required();
  ablate_flags.add_to(ab);
  ab->callback([&] {
    action = [&] {
      const TrainConfig config = resolve_config(config_path, ablate_flags);
      const auto volumes = read_volume_dir(data_dir);
      const TrainingData data = prepare_training_data(config, volumes);
      const auto table = ablate(config, data, &out);
      ensure_parent(report_path);
      write_text(report_path, table.to_json());
      const auto md = fs::path(report_path).replace_extension(".md");
      write_text(md, table.to_markdown());
      RunManifest manifest("ablate");
      manifest["seed"] = config.seed;
      manifest["config"] = config_json(config);
      manifest.input("data_dir", data_dir);
      manifest.output(report_path);
      manifest.output(md);
      manifest.write(beside(report_path));
      out << table.to_markdown();
    };
  });

  std::vector<std::string> argv_store{"voxdenoise"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const std::exception& e) {
    return map_error(e, err);
  }
  try {
    if (action) action();
  } catch (const std::exception& e) {
    return map_error(e, err);
  }
  return kExitOk;
}

}  // namespace voxdenoise::cli
