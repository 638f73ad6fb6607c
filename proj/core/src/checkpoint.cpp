// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/checkpoint.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "config_json.hpp"
#include "container.hpp"
#include "voxdenoise/errors.hpp"

namespace voxdenoise {

namespace {

constexpr std::string_view kCheckpointMagic = "CKPT";

struct Entry {
  std::string name;
  std::string role;
  Shape shape;
  std::size_t offset;
};

}  // namespace

Checkpoint snapshot(const Model<float>& model, const AdamState& adam, const TrainConfig& config,
                    std::size_t epoch) {
  Checkpoint c;
  c.config = config;
  c.config.model = model.config();
  c.epoch = epoch;
  for (const auto& [name, t] : model.parameters()) {
    c.parameters.emplace_back(name, Tensor::from(t.shape(), {t.values().begin(), t.values().end()}));
  }
  for (const auto& [name, stats] : model.buffers()) c.buffers.emplace_back(name, *stats);
  c.adam = adam;
  c.shuffle_seed = config.seed;
  return c;
}

Model<float> restore_model(const Checkpoint& checkpoint) {
  Model<float> model(checkpoint.config.model);
  auto params = model.parameters();
  if (params.size() != checkpoint.parameters.size()) {
    throw DimensionError("checkpoint holds " + std::to_string(checkpoint.parameters.size()) +
                         " parameters, model config needs " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, src] = checkpoint.parameters[i];
    auto& [expected, dst] = params[i];
    if (name != expected || src.shape() != dst.shape()) {
      throw DimensionError("checkpoint tensor '" + name + "' " + shape_str(src.shape()) +
                           " does not match model parameter '" + expected + "' " + shape_str(dst.shape()));
    }
    std::copy(src.values().begin(), src.values().end(), dst.mutable_values().begin());
  }
  auto buffers = model.buffers();
  if (buffers.size() != checkpoint.buffers.size()) {
    throw DimensionError("checkpoint holds " + std::to_string(checkpoint.buffers.size()) +
                         " norm buffers, model config needs " + std::to_string(buffers.size()));
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const auto& [name, stats] = checkpoint.buffers[i];
    if (name != buffers[i].first || stats.mean.size() != buffers[i].second->mean.size()) {
      throw DimensionError("checkpoint buffer '" + name + "' does not match model buffer '" + buffers[i].first + "'");
    }
    *buffers[i].second = stats;
  }
  return model;
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& c) {
  if (c.adam.m.size() != c.parameters.size() || c.adam.v.size() != c.parameters.size()) {
    throw DimensionError("checkpoint optimizer state does not cover every parameter");
  }
  std::size_t total = 0;
  for (const auto& [name, t] : c.parameters) total += 3 * t.numel();
  for (const auto& [name, stats] : c.buffers) total += stats.mean.size() + stats.var.size();
  std::vector<unsigned char> payload;
  payload.reserve(4 * total);
  auto tensors = nlohmann::json::array();
  const auto push = [&](const std::string& name, const char* role, const Shape& shape, std::span<const float> data) {
    tensors.push_back({{"name", name}, {"role", role}, {"shape", shape}, {"offset", payload.size()}});
    container::put_f32_le(payload, data);
  };
  for (std::size_t i = 0; i < c.parameters.size(); ++i) {
    const auto& [name, t] = c.parameters[i];
    push(name, "param", t.shape(), t.values());
    push(name, "adam_m", t.shape(), c.adam.m[i]);
    push(name, "adam_v", t.shape(), c.adam.v[i]);
  }
  auto initialized = nlohmann::json::object();
  for (const auto& [name, stats] : c.buffers) {
    push(name, "running_mean", {stats.mean.size()}, stats.mean);
    push(name, "running_var", {stats.var.size()}, stats.var);
    initialized[name] = stats.initialized;
  }

  nlohmann::json manifest;
  manifest["format"] = "voxdenoise-checkpoint/1";
  manifest["dtype"] = "f32";
  manifest["config"] = detail::train_json(c.config);
  manifest["epoch"] = c.epoch;
  manifest["adam_step"] = c.adam.step;
  manifest["best_epoch"] = c.best_epoch;
  if (std::isfinite(c.best_val_psnr)) {
    manifest["best_val_psnr"] = c.best_val_psnr;
  } else if (c.best_val_psnr > 0) {
    manifest["best_val_psnr"] = "inf";
  } else {
    manifest["best_val_psnr"] = nullptr;
  }
  manifest["rng"] = {{"shuffle_seed", c.shuffle_seed}, {"next_epoch", c.epoch}};
  manifest["buffers_initialized"] = initialized;
  manifest["tensors"] = tensors;
  manifest["payload_bytes"] = payload.size();

  auto out = container::begin(kCheckpointMagic, manifest.dump());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Checkpoint decode_checkpoint(std::span<const unsigned char> bytes, const std::string& origin) {
  const auto parsed = container::parse(bytes, kCheckpointMagic, origin);
  Checkpoint c;
  std::vector<Entry> entries;
  nlohmann::json initialized;
  std::size_t payload_bytes = 0;
  try {
    const auto m = nlohmann::json::parse(parsed.header);
    if (m.at("dtype").get<std::string>() != "f32") throw FormatError(origin + ": checkpoint dtype must be f32");
    c.config = detail::parse_train(m.at("config"));
    c.epoch = m.at("epoch").get<std::size_t>();
    c.adam.step = m.at("adam_step").get<std::uint64_t>();
    c.best_epoch = m.at("best_epoch").get<std::size_t>();
    const auto& best = m.at("best_val_psnr");
    if (best.is_null()) {
      c.best_val_psnr = -std::numeric_limits<double>::infinity();
    } else if (best.is_string()) {
      c.best_val_psnr = std::numeric_limits<double>::infinity();
    } else {
      c.best_val_psnr = best.get<double>();
    }
    c.shuffle_seed = m.at("rng").at("shuffle_seed").get<std::uint64_t>();
    initialized = m.at("buffers_initialized");
    payload_bytes = m.at("payload_bytes").get<std::size_t>();
    for (const auto& t : m.at("tensors")) {
      entries.push_back({t.at("name").get<std::string>(), t.at("role").get<std::string>(),
                         t.at("shape").get<Shape>(), t.at("offset").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": malformed checkpoint manifest: " + e.what());
  }
  if (parsed.payload.size() < payload_bytes) {
    throw TruncatedError(origin + ": payload has " + std::to_string(parsed.payload.size()) + " bytes, manifest needs " +
                         std::to_string(payload_bytes));
  }
  if (parsed.payload.size() > payload_bytes) {
    throw LengthMismatchError(origin + ": payload has " + std::to_string(parsed.payload.size()) +
                              " bytes, manifest declares " + std::to_string(payload_bytes));
  }

  const auto read = [&](const Entry& e) {
    const std::size_t n = shape_numel(e.shape);
    if (e.offset + 4 * n > parsed.payload.size()) {
      throw TruncatedError(origin + ": tensor '" + e.name + "' runs past the payload");
    }
    std::vector<float> data(n);
    container::get_f32_le(parsed.payload.data() + e.offset, data);
    return data;
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (e.role == "param") {
      if (i + 2 >= entries.size() || entries[i + 1].role != "adam_m" || entries[i + 2].role != "adam_v") {
        throw FormatError(origin + ": parameter '" + e.name + "' lacks its optimizer moments");
      }
      c.parameters.emplace_back(e.name, Tensor::from(e.shape, read(e)));
      c.adam.m.push_back(read(entries[i + 1]));
      c.adam.v.push_back(read(entries[i + 2]));
      i += 2;
    } else if (e.role == "running_mean") {
      if (i + 1 >= entries.size() || entries[i + 1].role != "running_var") {
        throw FormatError(origin + ": buffer '" + e.name + "' lacks its running variance");
      }
      ops::RunningStats<float> stats;
      stats.mean = read(e);
      stats.var = read(entries[i + 1]);
      stats.initialized = initialized.value(e.name, false);
      c.buffers.emplace_back(e.name, std::move(stats));
      i += 1;
    } else {
      throw FormatError(origin + ": unexpected tensor role '" + e.role + "'");
    }
  }
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  container::write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = container::read_file(path);
  return decode_checkpoint(bytes, path.string());
}

}  // namespace voxdenoise
