// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voxdenoise/ops.hpp"
#include "voxdenoise/tensor.hpp"

namespace voxdenoise {

enum class Variant {
  kMlpCnn,  // residual MLP encoders, then the encoder-decoder CNN
  kMlpMlp,  // 2L residual MLP encoders
  kCnnCnn,  // two chained encoder-decoder CNNs
};

enum class FinalActivation { kRelu, kLeakyRelu };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::string to_string(FinalActivation a);
FinalActivation final_activation_from_string(const std::string& s);
/// Row label used in ablation tables ("MLP+CNN", ...).
std::string display_name(Variant v);

struct ModelConfig {
  std::size_t patch_size = 16;  // P
  std::size_t slices = 6;       // C
  std::size_t mlp_blocks = 4;   // L
  std::size_t mlp_hidden = 4 * 16 * 16 * 6;
  std::size_t cnn_levels = 4;  // J
  std::vector<std::size_t> channels{32, 64, 128, 256};
  double leaky_slope = 0.2;
  Variant variant = Variant::kMlpCnn;
  FinalActivation final_activation = FinalActivation::kRelu;
  double ln_eps = ops::kDefaultNormEps;
  double bn_eps = ops::kDefaultNormEps;
  double bn_momentum = ops::kDefaultBnMomentum;
  std::uint64_t seed = 0;

  /// d = P * P * C, the flattened patch length.
  std::size_t patch_dim() const { return patch_size * patch_size * slices; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;

  /// L=4, hidden 4d, J=4, channels [32, 64, 128, 256].
  static ModelConfig standard();
  /// L=2, hidden 2d, J=2, channels [16, 32].
  static ModelConfig desk_scale();
  /// P=4, C=2, L=1, J=1, channels [2]; small enough for exhaustive gradient checks.
  static ModelConfig micro();
};

template <typename T>
using NamedTensor = std::pair<std::string, BasicTensor<T>>;

/// Hybrid denoiser with parameters stored as leaf tensors. Forward takes a
/// batch of flattened noisy patches [N x d] (or a single patch [d]) and
/// predicts the clean patches with the same shape.
template <typename T>
class Model {
 public:
  struct MlpBlock {
    BasicTensor<T> ln_gain, ln_shift, fc1_weight, fc1_bias, fc2_weight, fc2_bias;
  };
  struct ConvLevel {
    BasicTensor<T> kernel, bias;
    bool has_norm = true;
    BasicTensor<T> bn_gain, bn_shift;
    ops::RunningStats<T> stats;
  };
  /// Intermediates of one encoder-decoder pass.
  struct CnnTrace {
    std::vector<BasicTensor<T>> encoder;     // x_0 .. x_J
    std::vector<BasicTensor<T>> decoder_in;  // y_0 .. y_{J-1}
    std::vector<BasicTensor<T>> skip_sums;   // U_j y_{j-1} + x_{J-j} for j = 1 .. J
  };
  struct EncoderDecoder {
    std::vector<ConvLevel> encoder;  // H_1 .. H_J
    std::vector<ConvLevel> decoder;  // U_1 .. U_J; U_J has no norm
  };

  /// Builds a model with every weight zero and norms at gain 1, shift 0.
  explicit Model(ModelConfig config);

  /// Fan-in scaled uniform initialisation, deterministic in `seed`.
  static Model initialized(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  /// Trainable parameters in a fixed, canonical order.
  std::vector<NamedTensor<T>> parameters() const;
  /// Batch-norm running statistics in canonical order.
  std::vector<std::pair<std::string, ops::RunningStats<T>*>> buffers();
  std::vector<std::pair<std::string, const ops::RunningStats<T>*>> buffers() const;

  BasicTensor<T> forward(Tape<T>& tape, const BasicTensor<T>& noisy, ops::NormMode mode);

  /// Applies residual MLP blocks [first, first + count) to [N x d].
  BasicTensor<T> mlp_stack(Tape<T>& tape, const BasicTensor<T>& z, std::size_t first, std::size_t count);
  /// Applies encoder-decoder CNN `which` to [N x Ch x D x H x W] and returns the
  /// same shape.
  BasicTensor<T> encoder_decoder(Tape<T>& tape, const BasicTensor<T>& x0, std::size_t which, ops::NormMode mode,
                                 CnnTrace* trace = nullptr);

  /// Sets every fully-connected weight and bias to zero.
  void zero_mlp_weights();
  /// Sets every convolution kernel and bias to zero.
  void zero_cnn_weights();

  std::vector<MlpBlock>& mlp_blocks() { return mlp_; }
  std::vector<EncoderDecoder>& cnns() { return cnn_; }

 private:
  BasicTensor<T> mlp_block(Tape<T>& tape, const MlpBlock& block, const BasicTensor<T>& z);

  ModelConfig config_;
  std::vector<MlpBlock> mlp_;
  std::vector<EncoderDecoder> cnn_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace voxdenoise
