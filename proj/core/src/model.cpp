// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/model.hpp"

#include <cmath>
#include <random>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kMlpCnn: return "MLP_CNN";
    case Variant::kMlpMlp: return "MLP_MLP";
    case Variant::kCnnCnn: return "CNN_CNN";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "MLP_CNN") return Variant::kMlpCnn;
  if (s == "MLP_MLP") return Variant::kMlpMlp;
  if (s == "CNN_CNN") return Variant::kCnnCnn;
  throw ConfigError("unknown model variant '" + s + "' (expected MLP_CNN, MLP_MLP or CNN_CNN)");
}

std::string display_name(Variant v) {
  switch (v) {
    case Variant::kMlpCnn: return "MLP+CNN";
    case Variant::kMlpMlp: return "MLP+MLP";
    case Variant::kCnnCnn: return "CNN+CNN";
  }
  return "?";
}

std::string to_string(FinalActivation a) { return a == FinalActivation::kRelu ? "relu" : "leaky_relu"; }

FinalActivation final_activation_from_string(const std::string& s) {
  if (s == "relu") return FinalActivation::kRelu;
  if (s == "leaky_relu") return FinalActivation::kLeakyRelu;
  throw ConfigError("unknown final activation '" + s + "' (expected relu or leaky_relu)");
}

void ModelConfig::validate() const {
  if (patch_size < 4) throw ConfigError("patch_size must be >= 4, got " + std::to_string(patch_size));
  if (slices < 1) throw ConfigError("slices must be >= 1");
  if (mlp_blocks < 1) throw ConfigError("mlp_blocks (L) must be >= 1, got " + std::to_string(mlp_blocks));
  if (cnn_levels < 1) throw ConfigError("cnn_levels (J) must be >= 1, got " + std::to_string(cnn_levels));
  if (channels.size() != cnn_levels) {
    throw ConfigError("channels lists " + std::to_string(channels.size()) + " entries but cnn_levels is " +
                      std::to_string(cnn_levels));
  }
  for (std::size_t c : channels) {
    if (c == 0) throw ConfigError("channel counts must be positive");
  }
  if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be positive");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must lie in (0, 1)");
  if (!(ln_eps > 0.0) || !(bn_eps > 0.0)) throw ConfigError("normalization eps must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) throw ConfigError("bn_momentum must lie in (0, 1]");
}

ModelConfig ModelConfig::standard() { return ModelConfig{}; }

ModelConfig ModelConfig::desk_scale() {
  ModelConfig c;
  c.mlp_blocks = 2;
  c.mlp_hidden = 2 * c.patch_dim();
  c.cnn_levels = 2;
  c.channels = {16, 32};
  return c;
}

ModelConfig ModelConfig::micro() {
  ModelConfig c;
  c.patch_size = 4;
  c.slices = 2;
  c.mlp_blocks = 1;
  c.mlp_hidden = 2 * c.patch_dim();
  c.cnn_levels = 1;
  c.channels = {2};
  return c;
}

namespace {

template <typename T>
BasicTensor<T> param(Shape shape, T fill = T(0)) {
  return BasicTensor<T>::filled(std::move(shape), fill, true);
}

template <typename T>
void fill_uniform(BasicTensor<T>& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.mutable_values()) v = static_cast<T>(dist(rng));
}

template <typename T>
void fill_zero(BasicTensor<T>& t) {
  for (auto& v : t.mutable_values()) v = T(0);
}

}  // namespace

template <typename T>
Model<T>::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t d = config_.patch_dim();
  const std::size_t h = config_.mlp_hidden;
  std::size_t n_mlp = 0, n_cnn = 0;
  switch (config_.variant) {
    case Variant::kMlpCnn: n_mlp = config_.mlp_blocks; n_cnn = 1; break;
    case Variant::kMlpMlp: n_mlp = 2 * config_.mlp_blocks; break;
    case Variant::kCnnCnn: n_cnn = 2; break;
  }
  for (std::size_t i = 0; i < n_mlp; ++i) {
    mlp_.push_back({param<T>({d}, T(1)), param<T>({d}), param<T>({h, d}), param<T>({h}), param<T>({d, h}),
                    param<T>({d})});
  }
  const auto& ch = config_.channels;
  const std::size_t J = config_.cnn_levels;
  for (std::size_t k = 0; k < n_cnn; ++k) {
    EncoderDecoder net;
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t in = j == 0 ? 1 : ch[j - 1];
      const std::size_t out = ch[j];
      net.encoder.push_back({param<T>({out, in, 3, 3, 3}), param<T>({out}), true, param<T>({out}, T(1)),
                             param<T>({out}), ops::RunningStats<T>(out)});
    }
    std::size_t in = ch[J - 1];
    for (std::size_t j = 1; j <= J; ++j) {
      const bool last = j == J;
      const std::size_t out = last ? 1 : ch[J - j - 1];
      ConvLevel level{param<T>({in, out, 3, 3, 3}), param<T>({out}), !last, {}, {}, {}};
      if (!last) {
        level.bn_gain = param<T>({out}, T(1));
        level.bn_shift = param<T>({out});
        level.stats = ops::RunningStats<T>(out);
      }
      net.decoder.push_back(std::move(level));
      in = out;
    }
    cnn_.push_back(std::move(net));
  }
}

template <typename T>
Model<T> Model<T>::initialized(ModelConfig config, std::uint64_t seed) {
  Model m(std::move(config));
  std::mt19937_64 rng(seed);
  const std::size_t d = m.config_.patch_dim();
  for (auto& b : m.mlp_) {
    fill_uniform(b.fc1_weight, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    fill_uniform(b.fc1_bias, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    fill_uniform(b.fc2_weight, 1.0 / std::sqrt(static_cast<double>(m.config_.mlp_hidden)), rng);
    fill_uniform(b.fc2_bias, 1.0 / std::sqrt(static_cast<double>(m.config_.mlp_hidden)), rng);
  }
  for (auto& net : m.cnn_) {
    for (auto* levels : {&net.encoder, &net.decoder}) {
      for (auto& l : *levels) {
        // Both conv and deconv kernels put their input channels on the axis
        // that feeds each output voxel: axis 1 for conv, axis 0 for deconv.
        const bool is_decoder = levels == &net.decoder;
        const std::size_t fan_in = (is_decoder ? l.kernel.dim(0) : l.kernel.dim(1)) * 27;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        fill_uniform(l.kernel, bound, rng);
        fill_uniform(l.bias, bound, rng);
      }
    }
  }
  return m;
}

template <typename T>
std::vector<NamedTensor<T>> Model<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (std::size_t i = 0; i < mlp_.size(); ++i) {
    const std::string p = "mlp." + std::to_string(i) + ".";
    const auto& b = mlp_[i];
    out.emplace_back(p + "ln.gain", b.ln_gain);
    out.emplace_back(p + "ln.shift", b.ln_shift);
    out.emplace_back(p + "fc1.weight", b.fc1_weight);
    out.emplace_back(p + "fc1.bias", b.fc1_bias);
    out.emplace_back(p + "fc2.weight", b.fc2_weight);
    out.emplace_back(p + "fc2.bias", b.fc2_bias);
  }
  for (std::size_t k = 0; k < cnn_.size(); ++k) {
    const auto add_levels = [&](const std::vector<ConvLevel>& levels, const char* tag) {
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const std::string p = "cnn." + std::to_string(k) + "." + tag + "." + std::to_string(j) + ".";
        out.emplace_back(p + "kernel", levels[j].kernel);
        out.emplace_back(p + "bias", levels[j].bias);
        if (levels[j].has_norm) {
          out.emplace_back(p + "bn.gain", levels[j].bn_gain);
          out.emplace_back(p + "bn.shift", levels[j].bn_shift);
        }
      }
    };
    add_levels(cnn_[k].encoder, "enc");
    add_levels(cnn_[k].decoder, "dec");
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, ops::RunningStats<T>*>> Model<T>::buffers() {
  std::vector<std::pair<std::string, ops::RunningStats<T>*>> out;
  for (std::size_t k = 0; k < cnn_.size(); ++k) {
    const auto add_levels = [&](std::vector<ConvLevel>& levels, const char* tag) {
      for (std::size_t j = 0; j < levels.size(); ++j) {
        if (!levels[j].has_norm) continue;
        out.emplace_back("cnn." + std::to_string(k) + "." + tag + "." + std::to_string(j) + ".bn",
                         &levels[j].stats);
      }
    };
    add_levels(cnn_[k].encoder, "enc");
    add_levels(cnn_[k].decoder, "dec");
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const ops::RunningStats<T>*>> Model<T>::buffers() const {
  std::vector<std::pair<std::string, const ops::RunningStats<T>*>> out;
  for (auto& [name, stats] : const_cast<Model*>(this)->buffers()) out.emplace_back(name, stats);
  return out;
}

template <typename T>
BasicTensor<T> Model<T>::mlp_block(Tape<T>& tape, const MlpBlock& b, const BasicTensor<T>& z) {
  auto h = ops::layer_norm(tape, z, b.ln_gain, b.ln_shift, config_.ln_eps);
  h = ops::linear(tape, h, b.fc1_weight, b.fc1_bias);
  h = ops::activation(tape, ops::Activation::gelu(), h);
  h = ops::linear(tape, h, b.fc2_weight, b.fc2_bias);
  return ops::add(tape, z, h);
}

template <typename T>
BasicTensor<T> Model<T>::mlp_stack(Tape<T>& tape, const BasicTensor<T>& z, std::size_t first, std::size_t count) {
  if (first + count > mlp_.size()) {
    throw ConfigError("model has " + std::to_string(mlp_.size()) + " MLP blocks, requested [" +
                      std::to_string(first) + ", " + std::to_string(first + count) + ")");
  }
  BasicTensor<T> out = z;
  for (std::size_t i = first; i < first + count; ++i) out = mlp_block(tape, mlp_[i], out);
  return out;
}

template <typename T>
BasicTensor<T> Model<T>::encoder_decoder(Tape<T>& tape, const BasicTensor<T>& x0, std::size_t which,
                                         ops::NormMode mode, CnnTrace* trace) {
  if (which >= cnn_.size()) {
    throw ConfigError("model has " + std::to_string(cnn_.size()) + " encoder-decoder CNNs, requested #" +
                      std::to_string(which));
  }
  auto& net = cnn_[which];
  const auto leaky = ops::Activation::leaky_relu(config_.leaky_slope);
  const std::size_t J = net.encoder.size();

  std::vector<BasicTensor<T>> xs{x0};
  for (auto& level : net.encoder) {
    auto h = ops::conv3d(tape, xs.back(), level.kernel, level.bias);
    h = ops::batch_norm3d(tape, h, level.bn_gain, level.bn_shift, level.stats, mode, config_.bn_momentum,
                          config_.bn_eps);
    xs.push_back(ops::activation(tape, leaky, h));
  }

  if (trace) trace->encoder = xs;
  BasicTensor<T> y = xs[J];
  for (std::size_t j = 1; j < J; ++j) {
    auto& level = net.decoder[j - 1];
    if (trace) trace->decoder_in.push_back(y);
    auto u = ops::deconv3d(tape, y, level.kernel, level.bias);
    u = ops::add(tape, u, xs[J - j]);
    if (trace) trace->skip_sums.push_back(u);
    u = ops::batch_norm3d(tape, u, level.bn_gain, level.bn_shift, level.stats, mode, config_.bn_momentum,
                          config_.bn_eps);
    y = ops::activation(tape, leaky, u);
  }
  auto& last = net.decoder[J - 1];
  if (trace) trace->decoder_in.push_back(y);
  auto u = ops::deconv3d(tape, y, last.kernel, last.bias);
  u = ops::add(tape, u, xs[0]);
  if (trace) trace->skip_sums.push_back(u);
  const auto final_act = config_.final_activation == FinalActivation::kRelu ? ops::Activation::relu() : leaky;
  return ops::activation(tape, final_act, u);
}

template <typename T>
BasicTensor<T> Model<T>::forward(Tape<T>& tape, const BasicTensor<T>& noisy, ops::NormMode mode) {
  const std::size_t d = config_.patch_dim();
  const std::size_t P = config_.patch_size;
  const std::size_t C = config_.slices;
  std::size_t n = 1;
  if (noisy.rank() == 1 && noisy.dim(0) == d) {
    n = 1;
  } else if (noisy.rank() == 2 && noisy.dim(1) == d) {
    n = noisy.dim(0);
  } else {
    throw DimensionError("model input must be [" + std::to_string(d) + "] or [N x " + std::to_string(d) +
                         "], got " + shape_str(noisy.shape()));
  }
  BasicTensor<T> z = noisy.rank() == 1 ? ops::reshape(tape, noisy, {1, d}) : noisy;
  // The CNN sees each patch as a single-channel volume over (row, col, slice).
  const Shape volume{n, 1, P, P, C};
  BasicTensor<T> out;
  switch (config_.variant) {
    case Variant::kMlpCnn: {
      z = mlp_stack(tape, z, 0, config_.mlp_blocks);
      auto y = encoder_decoder(tape, ops::reshape(tape, z, volume), 0, mode);
      out = ops::reshape(tape, y, {n, d});
      break;
    }
    case Variant::kMlpMlp:
      out = mlp_stack(tape, z, 0, 2 * config_.mlp_blocks);
      break;
    case Variant::kCnnCnn: {
      auto y = encoder_decoder(tape, ops::reshape(tape, z, volume), 0, mode);
      y = encoder_decoder(tape, y, 1, mode);
      out = ops::reshape(tape, y, {n, d});
      break;
    }
  }
  return noisy.rank() == 1 ? ops::reshape(tape, out, {d}) : out;
}

template <typename T>
void Model<T>::zero_mlp_weights() {
  for (auto& b : mlp_) {
    fill_zero(b.fc1_weight);
    fill_zero(b.fc1_bias);
    fill_zero(b.fc2_weight);
    fill_zero(b.fc2_bias);
  }
}

template <typename T>
void Model<T>::zero_cnn_weights() {
  for (auto& net : cnn_) {
    for (auto* levels : {&net.encoder, &net.decoder}) {
      for (auto& l : *levels) {
        fill_zero(l.kernel);
        fill_zero(l.bias);
      }
    }
  }
}

template class Model<float>;
template class Model<double>;

}  // namespace voxdenoise
