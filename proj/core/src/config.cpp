// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "config_json.hpp"
#include "voxdenoise/errors.hpp"

namespace voxdenoise {

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ConfigError("noise_level must lie in [0, 1]");
  if (mixed_levels) {
    if (mixed_noise_levels.empty()) throw ConfigError("mixed_noise_levels is empty");
    for (double l : mixed_noise_levels) {
      if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("mixed noise levels must lie in [0, 1]");
    }
  }
  if (patch_stride < 1) throw ConfigError("patch_stride must be >= 1");
  if (effective_inference_stride() > model.patch_size) {
    throw ConfigError("inference stride larger than the patch size leaves voxels uncovered");
  }
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
  if (n_train < 1) throw ConfigError("n_train must be >= 1");
}

TrainConfig TrainConfig::desk_scale() { return TrainConfig{}; }

namespace detail {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ConfigError(std::string("unknown ") + where + " field '" + item.key() + "'");
    }
  }
}

}  // namespace

nlohmann::json model_json(const ModelConfig& c) {
  nlohmann::json j;
  j["patch_size"] = c.patch_size;
  j["slices"] = c.slices;
  j["mlp_blocks"] = c.mlp_blocks;
  j["mlp_hidden"] = c.mlp_hidden;
  j["cnn_levels"] = c.cnn_levels;
  j["channels"] = c.channels;
  j["leaky_slope"] = c.leaky_slope;
  j["variant"] = to_string(c.variant);
  j["final_activation"] = to_string(c.final_activation);
  j["ln_eps"] = c.ln_eps;
  j["bn_eps"] = c.bn_eps;
  j["bn_momentum"] = c.bn_momentum;
  j["seed"] = c.seed;
  return j;
}

ModelConfig parse_model(const nlohmann::json& j) {
  reject_unknown(j,
                 {"patch_size", "slices", "mlp_blocks", "mlp_hidden", "cnn_levels", "channels", "leaky_slope",
                  "variant", "final_activation", "ln_eps", "bn_eps", "bn_momentum", "seed"},
                 "model");
  ModelConfig c = ModelConfig::desk_scale();
  read(j, "patch_size", c.patch_size);
  read(j, "slices", c.slices);
  // The desk-scale hidden width tracks d unless given explicitly.
  c.mlp_hidden = 2 * c.patch_dim();
  read(j, "mlp_blocks", c.mlp_blocks);
  read(j, "mlp_hidden", c.mlp_hidden);
  read(j, "cnn_levels", c.cnn_levels);
  read(j, "channels", c.channels);
  read(j, "leaky_slope", c.leaky_slope);
  std::string s;
  if (j.contains("variant")) {
    read(j, "variant", s);
    c.variant = variant_from_string(s);
  }
  if (j.contains("final_activation")) {
    read(j, "final_activation", s);
    c.final_activation = final_activation_from_string(s);
  }
  read(j, "ln_eps", c.ln_eps);
  read(j, "bn_eps", c.bn_eps);
  read(j, "bn_momentum", c.bn_momentum);
  read(j, "seed", c.seed);
  return c;
}

nlohmann::json train_json(const TrainConfig& c) {
  nlohmann::json j;
  j["model"] = model_json(c.model);
  j["learning_rate"] = c.learning_rate;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["noise_level"] = c.noise_level;
  j["mixed_levels"] = c.mixed_levels;
  j["mixed_noise_levels"] = c.mixed_noise_levels;
  j["patch_stride"] = c.patch_stride;
  j["inference_stride"] = c.inference_stride;
  j["checkpoint_every"] = c.checkpoint_every;
  j["n_train"] = c.n_train;
  j["n_val"] = c.n_val;
  j["n_test"] = c.n_test;
  j["deterministic"] = c.deterministic;
  return j;
}

TrainConfig parse_train(const nlohmann::json& j) {
  reject_unknown(j,
                 {"model", "learning_rate", "beta1", "beta2", "adam_eps", "batch_size", "epochs", "seed",
                  "noise_level", "mixed_levels", "mixed_noise_levels", "patch_stride", "inference_stride",
                  "checkpoint_every", "n_train", "n_val", "n_test", "deterministic"},
                 "train");
  TrainConfig c = TrainConfig::desk_scale();
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  read(j, "learning_rate", c.learning_rate);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "adam_eps", c.adam_eps);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "noise_level", c.noise_level);
  read(j, "mixed_levels", c.mixed_levels);
  read(j, "mixed_noise_levels", c.mixed_noise_levels);
  read(j, "patch_stride", c.patch_stride);
  read(j, "inference_stride", c.inference_stride);
  read(j, "checkpoint_every", c.checkpoint_every);
  read(j, "n_train", c.n_train);
  read(j, "n_val", c.n_val);
  read(j, "n_test", c.n_test);
  read(j, "deterministic", c.deterministic);
  return c;
}

}  // namespace detail

namespace {

nlohmann::json parse_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json(const ModelConfig& config) { return detail::model_json(config).dump(2); }
std::string to_json(const TrainConfig& config) { return detail::train_json(config).dump(2); }

ModelConfig model_config_from_json(const std::string& json) {
  auto c = detail::parse_model(parse_text(json));
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const std::string& json) {
  auto c = detail::parse_train(parse_text(json));
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return train_config_from_json(ss.str());
}

}  // namespace voxdenoise
