// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "voxdenoise/tensor.hpp"

/// Differentiable operators. Every op records itself on the given tape and
/// returns a fresh tensor; no op broadcasts. Reductions accumulate in double
/// regardless of the storage type.
namespace voxdenoise::ops {

enum class ActivationKind { kGelu, kLeakyRelu, kRelu };

struct Activation {
  ActivationKind kind = ActivationKind::kGelu;
  double slope = 0.2;  // leaky_relu only

  static Activation gelu() { return {ActivationKind::kGelu, 0.0}; }
  static Activation relu() { return {ActivationKind::kRelu, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::kLeakyRelu, slope}; }
};

enum class NormMode { kTrain, kEval };

/// Per-channel running mean/variance owned by a batch-norm layer.
template <typename T>
struct RunningStats {
  std::vector<T> mean;
  std::vector<T> var;
  bool initialized = false;

  RunningStats() = default;
  explicit RunningStats(std::size_t channels) : mean(channels, T(0)), var(channels, T(1)) {}
};

inline constexpr double kDefaultNormEps = 1e-5;
inline constexpr double kDefaultBnMomentum = 0.1;

/// out = weight . x + bias. `x` is [d_in] or a batch [N x d_in]; weight is
/// [d_out x d_in]; bias is [d_out].
template <typename T>
BasicTensor<T> linear(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias);

/// 3x3x3 cross-correlation, stride 1, zero padding 1. `x` is [N x Cin x D x H x W]
/// or [Cin x D x H x W]; kernel is [Cout x Cin x 3 x 3 x 3].
template <typename T>
BasicTensor<T> conv3d(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias);

/// Transposed counterpart of conv3d under the same geometry. Kernel is
/// [Cin x Cout x 3 x 3 x 3]; with bias 0, deconv3d(., K) is the exact adjoint of
/// conv3d(., K).
template <typename T>
BasicTensor<T> deconv3d(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& kernel,
                        const BasicTensor<T>& bias);

/// Normalizes each row over the last axis, then applies gain and shift.
template <typename T>
BasicTensor<T> layer_norm(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& gain,
                          const BasicTensor<T>& shift, double eps = kDefaultNormEps);

/// Per-channel normalization of [N x C x D x H x W]. Train mode uses batch
/// statistics and folds them into `stats`; eval mode reads `stats`.
template <typename T>
BasicTensor<T> batch_norm3d(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& gain,
                            const BasicTensor<T>& shift, RunningStats<T>& stats, NormMode mode,
                            double momentum = kDefaultBnMomentum, double eps = kDefaultNormEps);

template <typename T>
BasicTensor<T> activation(Tape<T>& tape, Activation act, const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> add(Tape<T>& tape, const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Mean of squared differences, returned as a one-element tensor.
template <typename T>
BasicTensor<T> mse_loss(Tape<T>& tape, const BasicTensor<T>& pred, const BasicTensor<T>& target);

template <typename T>
BasicTensor<T> sum(Tape<T>& tape, const BasicTensor<T>& x);

/// Inner product of two same-shape tensors.
template <typename T>
BasicTensor<T> dot(Tape<T>& tape, const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> reshape(Tape<T>& tape, const BasicTensor<T>& x, Shape new_shape);

}  // namespace voxdenoise::ops
