// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace voxdenoise::ops {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

std::string axis_msg(const char* op, const char* what, std::size_t axis, std::size_t got,
                     const char* other, std::size_t other_axis, std::size_t expected) {
  return std::string(op) + ": " + what + " axis " + std::to_string(axis) + " has size " +
         std::to_string(got) + " but " + other + " axis " + std::to_string(other_axis) +
         " has size " + std::to_string(expected);
}

template <typename T>
void require_same_shape(const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

// Geometry of a batched 5-D volume tensor.
struct VolumeDims {
  std::size_t n, c, d, h, w;
  bool batched;
  std::size_t spatial() const { return d * h * w; }
};

template <typename T>
VolumeDims volume_dims(const char* op, const BasicTensor<T>& x) {
  if (x.rank() == 5) return {x.dim(0), x.dim(1), x.dim(2), x.dim(3), x.dim(4), true};
  if (x.rank() == 4) return {1, x.dim(0), x.dim(1), x.dim(2), x.dim(3), false};
  throw DimensionError(std::string(op) + ": input must be [N x C x D x H x W] or [C x D x H x W], got " +
                       shape_str(x.shape()));
}

Shape volume_shape(const VolumeDims& v, std::size_t channels) {
  if (v.batched) return {v.n, channels, v.d, v.h, v.w};
  return {channels, v.d, v.h, v.w};
}

template <typename T>
void check_cubic_kernel(const char* op, const BasicTensor<T>& kernel) {
  if (kernel.rank() != 5 || kernel.dim(2) != 3 || kernel.dim(3) != 3 || kernel.dim(4) != 3) {
    throw DimensionError(std::string(op) + ": kernel must be [A x B x 3 x 3 x 3], got " +
                         shape_str(kernel.shape()));
  }
}

constexpr std::size_t kTaps = 27;

// Unfolds a [C x D x H x W] volume into [C*27 x D*H*W] columns for a 3x3x3
// window with zero padding 1.
template <typename T>
void im2col(const T* x, const VolumeDims& v, std::size_t channels, T* cols) {
  const std::size_t S = v.spatial();
  for (std::size_t c = 0; c < channels; ++c) {
    const T* xc = x + c * S;
    for (std::size_t kd = 0; kd < 3; ++kd) {
      for (std::size_t kh = 0; kh < 3; ++kh) {
        for (std::size_t kw = 0; kw < 3; ++kw) {
          T* row = cols + (c * kTaps + kd * 9 + kh * 3 + kw) * S;
          const std::size_t w_lo = kw == 0 ? 1 : 0;
          const std::size_t w_hi = kw == 2 ? v.w - 1 : v.w;
          for (std::size_t d = 0; d < v.d; ++d) {
            const std::ptrdiff_t sd = static_cast<std::ptrdiff_t>(d + kd) - 1;
            for (std::size_t h = 0; h < v.h; ++h) {
              T* out = row + (d * v.h + h) * v.w;
              const std::ptrdiff_t sh = static_cast<std::ptrdiff_t>(h + kh) - 1;
              if (sd < 0 || sd >= static_cast<std::ptrdiff_t>(v.d) || sh < 0 ||
                  sh >= static_cast<std::ptrdiff_t>(v.h)) {
                std::fill(out, out + v.w, T(0));
                continue;
              }
              const T* src = xc + (static_cast<std::size_t>(sd) * v.h + static_cast<std::size_t>(sh)) * v.w;
              if (w_lo) out[0] = T(0);
              if (w_hi < v.w) out[v.w - 1] = T(0);
              for (std::size_t w = w_lo; w < w_hi; ++w) out[w] = src[w + kw - 1];
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-adds columns back into a [C x D x H x W] volume.
template <typename T>
void col2im(const T* cols, const VolumeDims& v, std::size_t channels, T* x) {
  const std::size_t S = v.spatial();
  for (std::size_t c = 0; c < channels; ++c) {
    T* xc = x + c * S;
    for (std::size_t kd = 0; kd < 3; ++kd) {
      for (std::size_t kh = 0; kh < 3; ++kh) {
        for (std::size_t kw = 0; kw < 3; ++kw) {
          const T* row = cols + (c * kTaps + kd * 9 + kh * 3 + kw) * S;
          const std::size_t w_lo = kw == 0 ? 1 : 0;
          const std::size_t w_hi = kw == 2 ? v.w - 1 : v.w;
          for (std::size_t d = 0; d < v.d; ++d) {
            const std::ptrdiff_t sd = static_cast<std::ptrdiff_t>(d + kd) - 1;
            if (sd < 0 || sd >= static_cast<std::ptrdiff_t>(v.d)) continue;
            for (std::size_t h = 0; h < v.h; ++h) {
              const std::ptrdiff_t sh = static_cast<std::ptrdiff_t>(h + kh) - 1;
              if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(v.h)) continue;
              const T* in = row + (d * v.h + h) * v.w;
              T* dst = xc + (static_cast<std::size_t>(sd) * v.h + static_cast<std::size_t>(sh)) * v.w;
              for (std::size_t w = w_lo; w < w_hi; ++w) dst[w + kw - 1] += in[w];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void add_channel_bias(T* out, std::span<const T> bias, std::size_t spatial) {
  for (std::size_t c = 0; c < bias.size(); ++c) {
    T* row = out + c * spatial;
    const T b = bias[c];
    for (std::size_t i = 0; i < spatial; ++i) row[i] += b;
  }
}

template <typename T>
void accumulate_channel_sums(const T* g, std::size_t channels, std::size_t spatial, std::span<T> db) {
  for (std::size_t c = 0; c < channels; ++c) {
    double s = 0.0;
    const T* row = g + c * spatial;
    for (std::size_t i = 0; i < spatial; ++i) s += row[i];
    db[c] += static_cast<T>(s);
  }
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double gaussian_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

template <typename T>
BasicTensor<T> linear(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias) {
  if (weight.rank() != 2) {
    throw DimensionError("linear: weight must be [d_out x d_in], got " + shape_str(weight.shape()));
  }
  const std::size_t d_out = weight.dim(0);
  const std::size_t d_in = weight.dim(1);
  if (bias.rank() != 1 || bias.dim(0) != d_out) {
    throw DimensionError(axis_msg("linear", "bias", 0, bias.dim(0), "weight", 0, d_out));
  }
  std::size_t n = 1;
  Shape out_shape{d_out};
  if (x.rank() == 1) {
    if (x.dim(0) != d_in) throw DimensionError(axis_msg("linear", "x", 0, x.dim(0), "weight", 1, d_in));
  } else if (x.rank() == 2) {
    n = x.dim(0);
    if (x.dim(1) != d_in) throw DimensionError(axis_msg("linear", "x", 1, x.dim(1), "weight", 1, d_in));
    out_shape = {n, d_out};
  } else {
    throw DimensionError("linear: x must be [d_in] or [N x d_in], got " + shape_str(x.shape()));
  }

  std::vector<T> out(n * d_out);
  {
    MatMap<T> y(out.data(), n, d_out);
    ConstMatMap<T> xm(x.values().data(), n, d_in);
    ConstMatMap<T> wm(weight.values().data(), d_out, d_in);
    y.noalias() = xm * wm.transpose();
    const auto b = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.values().data(), d_out);
    y.rowwise() += b;
  }

  return tape.record(std::move(out_shape), std::move(out), {x, weight, bias},
                     [x, weight, bias, n, d_in, d_out](std::span<const T> g) mutable {
                       ConstMatMap<T> gm(g.data(), n, d_out);
                       if (x.requires_grad()) {
                         MatMap<T> dx(x.mutable_grad().data(), n, d_in);
                         dx.noalias() += gm * ConstMatMap<T>(weight.values().data(), d_out, d_in);
                       }
                       if (weight.requires_grad()) {
                         MatMap<T> dw(weight.mutable_grad().data(), d_out, d_in);
                         dw.noalias() += gm.transpose() * ConstMatMap<T>(x.values().data(), n, d_in);
                       }
                       if (bias.requires_grad()) {
                         auto db = bias.mutable_grad();
                         for (std::size_t j = 0; j < d_out; ++j) {
                           double s = 0.0;
                           for (std::size_t i = 0; i < n; ++i) s += gm(i, j);
                           db[j] += static_cast<T>(s);
                         }
                       }
                     });
}

template <typename T>
BasicTensor<T> conv3d(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias) {
  const VolumeDims v = volume_dims("conv3d", x);
  check_cubic_kernel("conv3d", kernel);
  const std::size_t c_out = kernel.dim(0);
  const std::size_t c_in = kernel.dim(1);
  if (c_in != v.c) {
    throw DimensionError(axis_msg("conv3d", "input", v.batched ? 1 : 0, v.c, "kernel", 1, c_in));
  }
  if (bias.rank() != 1 || bias.dim(0) != c_out) {
    throw DimensionError(axis_msg("conv3d", "bias", 0, bias.dim(0), "kernel", 0, c_out));
  }
  const std::size_t S = v.spatial();
  const std::size_t K = c_in * kTaps;

  std::vector<T> out(v.n * c_out * S);
  std::vector<T> cols(K * S);
  ConstMatMap<T> km(kernel.values().data(), c_out, K);
  for (std::size_t b = 0; b < v.n; ++b) {
    im2col(x.values().data() + b * c_in * S, v, c_in, cols.data());
    MatMap<T> ob(out.data() + b * c_out * S, c_out, S);
    ob.noalias() = km * ConstMatMap<T>(cols.data(), K, S);
    add_channel_bias(out.data() + b * c_out * S, bias.values(), S);
  }

  return tape.record(volume_shape(v, c_out), std::move(out), {x, kernel, bias},
                     [x, kernel, bias, v, c_in, c_out, S, K](std::span<const T> g) mutable {
                       std::vector<T> cols(K * S);
                       ConstMatMap<T> km(kernel.values().data(), c_out, K);
                       for (std::size_t b = 0; b < v.n; ++b) {
                         ConstMatMap<T> gb(g.data() + b * c_out * S, c_out, S);
                         if (kernel.requires_grad()) {
                           im2col(x.values().data() + b * c_in * S, v, c_in, cols.data());
                           MatMap<T> dk(kernel.mutable_grad().data(), c_out, K);
                           dk.noalias() += gb * ConstMatMap<T>(cols.data(), K, S).transpose();
                         }
                         if (x.requires_grad()) {
                           MatMap<T> dcols(cols.data(), K, S);
                           dcols.noalias() = km.transpose() * gb;
                           col2im(cols.data(), v, c_in, x.mutable_grad().data() + b * c_in * S);
                         }
                         if (bias.requires_grad()) {
                           accumulate_channel_sums(g.data() + b * c_out * S, c_out, S, bias.mutable_grad());
                         }
                       }
                     });
}

template <typename T>
BasicTensor<T> deconv3d(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& kernel,
                        const BasicTensor<T>& bias) {
  const VolumeDims v = volume_dims("deconv3d", x);
  check_cubic_kernel("deconv3d", kernel);
  const std::size_t c_in = kernel.dim(0);
  const std::size_t c_out = kernel.dim(1);
  if (c_in != v.c) {
    throw DimensionError(axis_msg("deconv3d", "input", v.batched ? 1 : 0, v.c, "kernel", 0, c_in));
  }
  if (bias.rank() != 1 || bias.dim(0) != c_out) {
    throw DimensionError(axis_msg("deconv3d", "bias", 0, bias.dim(0), "kernel", 1, c_out));
  }
  const std::size_t S = v.spatial();
  const std::size_t K = c_out * kTaps;

  std::vector<T> out(v.n * c_out * S, T(0));
  std::vector<T> cols(K * S);
  ConstMatMap<T> km(kernel.values().data(), c_in, K);
  for (std::size_t b = 0; b < v.n; ++b) {
    MatMap<T> cm(cols.data(), K, S);
    cm.noalias() = km.transpose() * ConstMatMap<T>(x.values().data() + b * c_in * S, c_in, S);
    col2im(cols.data(), v, c_out, out.data() + b * c_out * S);
    add_channel_bias(out.data() + b * c_out * S, bias.values(), S);
  }

  return tape.record(volume_shape(v, c_out), std::move(out), {x, kernel, bias},
                     [x, kernel, bias, v, c_in, c_out, S, K](std::span<const T> g) mutable {
                       std::vector<T> gcols(K * S);
                       ConstMatMap<T> km(kernel.values().data(), c_in, K);
                       for (std::size_t b = 0; b < v.n; ++b) {
                         if (!x.requires_grad() && !kernel.requires_grad() && !bias.requires_grad()) break;
                         im2col(g.data() + b * c_out * S, v, c_out, gcols.data());
                         ConstMatMap<T> gc(gcols.data(), K, S);
                         if (x.requires_grad()) {
                           MatMap<T> dx(x.mutable_grad().data() + b * c_in * S, c_in, S);
                           dx.noalias() += km * gc;
                         }
                         if (kernel.requires_grad()) {
                           MatMap<T> dk(kernel.mutable_grad().data(), c_in, K);
                           dk.noalias() += ConstMatMap<T>(x.values().data() + b * c_in * S, c_in, S) * gc.transpose();
                         }
                         if (bias.requires_grad()) {
                           accumulate_channel_sums(g.data() + b * c_out * S, c_out, S, bias.mutable_grad());
                         }
                       }
                     });
}

template <typename T>
BasicTensor<T> layer_norm(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& gain,
                          const BasicTensor<T>& shift, double eps) {
  if (x.rank() < 1) throw DimensionError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gain.rank() != 1 || gain.dim(0) != d) {
    throw DimensionError(axis_msg("layer_norm", "gain", 0, gain.dim(0), "x", x.rank() - 1, d));
  }
  if (shift.rank() != 1 || shift.dim(0) != d) {
    throw DimensionError(axis_msg("layer_norm", "shift", 0, shift.dim(0), "x", x.rank() - 1, d));
  }
  if (d == 1 && eps <= 0.0) {
    throw DomainError("layer_norm: a single-element axis has zero variance; eps must be positive");
  }
  const std::size_t rows = x.numel() / d;
  const auto xv = x.values();
  const auto gv = gain.values();
  const auto sv = shift.values();

  std::vector<T> out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += xr[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= static_cast<double>(d);
    if (var + eps <= 0.0) throw DomainError("layer_norm: zero variance with eps = 0");
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (xr[i] - mean) * is;
      xhat[r * d + i] = h;
      out[r * d + i] = static_cast<T>(gv[i] * h + sv[i]);
    }
  }

  return tape.record(x.shape(), std::move(out), {x, gain, shift},
                     [x, gain, shift, d, rows, xhat = std::move(xhat),
                      inv_std = std::move(inv_std)](std::span<const T> g) mutable {
                       const auto gv = gain.values();
                       if (gain.requires_grad() || shift.requires_grad()) {
                         std::vector<double> dg(d, 0.0), ds(d, 0.0);
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t i = 0; i < d; ++i) {
                             dg[i] += g[r * d + i] * xhat[r * d + i];
                             ds[i] += g[r * d + i];
                           }
                         }
                         if (gain.requires_grad()) {
                           auto out = gain.mutable_grad();
                           for (std::size_t i = 0; i < d; ++i) out[i] += static_cast<T>(dg[i]);
                         }
                         if (shift.requires_grad()) {
                           auto out = shift.mutable_grad();
                           for (std::size_t i = 0; i < d; ++i) out[i] += static_cast<T>(ds[i]);
                         }
                       }
                       if (!x.requires_grad()) return;
                       auto dx = x.mutable_grad();
                       for (std::size_t r = 0; r < rows; ++r) {
                         double mean_dh = 0.0, mean_dh_h = 0.0;
                         for (std::size_t i = 0; i < d; ++i) {
                           const double dh = g[r * d + i] * static_cast<double>(gv[i]);
                           mean_dh += dh;
                           mean_dh_h += dh * xhat[r * d + i];
                         }
                         mean_dh /= static_cast<double>(d);
                         mean_dh_h /= static_cast<double>(d);
                         for (std::size_t i = 0; i < d; ++i) {
                           const double dh = g[r * d + i] * static_cast<double>(gv[i]);
                           dx[r * d + i] += static_cast<T>(inv_std[r] * (dh - mean_dh - xhat[r * d + i] * mean_dh_h));
                         }
                       }
                     });
}

template <typename T>
BasicTensor<T> batch_norm3d(Tape<T>& tape, const BasicTensor<T>& x, const BasicTensor<T>& gain,
                            const BasicTensor<T>& shift, RunningStats<T>& stats, NormMode mode,
                            double momentum, double eps) {
  if (x.rank() != 5) {
    throw DimensionError("batch_norm3d: input must be [N x C x D x H x W], got " + shape_str(x.shape()));
  }
  const std::size_t n = x.dim(0);
  const std::size_t C = x.dim(1);
  const std::size_t S = x.dim(2) * x.dim(3) * x.dim(4);
  if (gain.rank() != 1 || gain.dim(0) != C) {
    throw DimensionError(axis_msg("batch_norm3d", "gain", 0, gain.dim(0), "x", 1, C));
  }
  if (shift.rank() != 1 || shift.dim(0) != C) {
    throw DimensionError(axis_msg("batch_norm3d", "shift", 0, shift.dim(0), "x", 1, C));
  }
  if (stats.mean.size() != C || stats.var.size() != C) {
    throw DimensionError("batch_norm3d: running statistics sized for " + std::to_string(stats.mean.size()) +
                         " channels, input has " + std::to_string(C));
  }
  const std::size_t count = n * S;
  const bool train = mode == NormMode::kTrain;
  if (train && count < 2) {
    throw DomainError("batch_norm3d: train mode needs at least 2 values per channel, got " +
                      std::to_string(count));
  }
  if (!train && !stats.initialized) {
    throw StatsError("batch_norm3d: eval mode before any train-mode update of the running statistics");
  }

  const auto xv = x.values();
  const auto gv = gain.values();
  const auto sv = shift.values();
  std::vector<T> out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(C);

  for (std::size_t c = 0; c < C; ++c) {
    double mean, var;
    if (train) {
      mean = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xv.data() + (b * C + c) * S;
        for (std::size_t i = 0; i < S; ++i) mean += p[i];
      }
      mean /= static_cast<double>(count);
      var = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const T* p = xv.data() + (b * C + c) * S;
        for (std::size_t i = 0; i < S; ++i) var += (p[i] - mean) * (p[i] - mean);
      }
      var /= static_cast<double>(count);
      const double unbiased = var * static_cast<double>(count) / static_cast<double>(count - 1);
      stats.mean[c] = static_cast<T>((1.0 - momentum) * stats.mean[c] + momentum * mean);
      stats.var[c] = static_cast<T>((1.0 - momentum) * stats.var[c] + momentum * unbiased);
    } else {
      mean = stats.mean[c];
      var = stats.var[c];
    }
    if (var + eps <= 0.0) throw DomainError("batch_norm3d: zero variance with eps = 0");
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[c] = is;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * C + c) * S;
      for (std::size_t i = 0; i < S; ++i) {
        const double h = (xv[off + i] - mean) * is;
        xhat[off + i] = h;
        out[off + i] = static_cast<T>(gv[c] * h + sv[c]);
      }
    }
  }
  if (train) stats.initialized = true;

  return tape.record(x.shape(), std::move(out), {x, gain, shift},
                     [x, gain, shift, n, C, S, count, train, xhat = std::move(xhat),
                      inv_std = std::move(inv_std)](std::span<const T> g) mutable {
                       const auto gv = gain.values();
                       for (std::size_t c = 0; c < C; ++c) {
                         double sum_g = 0.0, sum_g_h = 0.0;
                         for (std::size_t b = 0; b < n; ++b) {
                           const std::size_t off = (b * C + c) * S;
                           for (std::size_t i = 0; i < S; ++i) {
                             sum_g += g[off + i];
                             sum_g_h += g[off + i] * xhat[off + i];
                           }
                         }
                         if (gain.requires_grad()) gain.mutable_grad()[c] += static_cast<T>(sum_g_h);
                         if (shift.requires_grad()) shift.mutable_grad()[c] += static_cast<T>(sum_g);
                         if (!x.requires_grad()) continue;
                         auto dx = x.mutable_grad();
                         const double scale = gv[c] * inv_std[c];
                         if (!train) {
                           for (std::size_t b = 0; b < n; ++b) {
                             const std::size_t off = (b * C + c) * S;
                             for (std::size_t i = 0; i < S; ++i) dx[off + i] += static_cast<T>(scale * g[off + i]);
                           }
                           continue;
                         }
                         const double mean_g = sum_g / static_cast<double>(count);
                         const double mean_g_h = sum_g_h / static_cast<double>(count);
                         for (std::size_t b = 0; b < n; ++b) {
                           const std::size_t off = (b * C + c) * S;
                           for (std::size_t i = 0; i < S; ++i) {
                             dx[off + i] += static_cast<T>(scale * (g[off + i] - mean_g - xhat[off + i] * mean_g_h));
                           }
                         }
                       }
                     });
}

template <typename T>
BasicTensor<T> activation(Tape<T>& tape, Activation act, const BasicTensor<T>& x) {
  if (act.kind == ActivationKind::kLeakyRelu && !(act.slope > 0.0 && act.slope < 1.0)) {
    throw ConfigError("leaky_relu slope must lie in (0, 1), got " + std::to_string(act.slope));
  }
  const auto xv = x.values();
  std::vector<T> out(xv.size());
  switch (act.kind) {
    case ActivationKind::kGelu:
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const double v = xv[i];
        out[i] = static_cast<T>(v * gaussian_cdf(v));
      }
      break;
    case ActivationKind::kRelu:
      for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] < T(0) ? T(0) : xv[i];
      break;
    case ActivationKind::kLeakyRelu: {
      const T slope = static_cast<T>(act.slope);
      for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] < T(0) ? slope * xv[i] : xv[i];
      break;
    }
  }
  if (tape.track_kinks() && act.kind != ActivationKind::kGelu) {
    auto& signs = tape.kink_signs();
    for (T v : xv) signs.push_back(v > T(0));
  }

  return tape.record(x.shape(), std::move(out), {x}, [x, act](std::span<const T> g) mutable {
    const auto xv = x.values();
    auto dx = x.mutable_grad();
    switch (act.kind) {
      case ActivationKind::kGelu:
        for (std::size_t i = 0; i < xv.size(); ++i) {
          const double v = xv[i];
          dx[i] += static_cast<T>(g[i] * (gaussian_cdf(v) + v * gaussian_pdf(v)));
        }
        break;
      case ActivationKind::kRelu:
        for (std::size_t i = 0; i < xv.size(); ++i) {
          if (xv[i] > T(0)) dx[i] += g[i];
        }
        break;
      case ActivationKind::kLeakyRelu: {
        const T slope = static_cast<T>(act.slope);
        for (std::size_t i = 0; i < xv.size(); ++i) dx[i] += xv[i] > T(0) ? g[i] : slope * g[i];
        break;
      }
    }
  });
}

template <typename T>
BasicTensor<T> add(Tape<T>& tape, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("add", a, b);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return tape.record(a.shape(), std::move(out), {a, b}, [a, b](std::span<const T> g) mutable {
    Tape<T>::accumulate(a, g);
    Tape<T>::accumulate(b, g);
  });
}

template <typename T>
BasicTensor<T> mse_loss(Tape<T>& tape, const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  require_same_shape("mse_loss", pred, target);
  const auto pv = pred.values();
  const auto tv = target.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double diff = static_cast<double>(pv[i]) - static_cast<double>(tv[i]);
    acc += diff * diff;
  }
  const double n = static_cast<double>(pv.size());
  return tape.record({1}, {static_cast<T>(acc / n)}, {pred, target},
                     [pred, target, n](std::span<const T> g) mutable {
                       const double scale = 2.0 * static_cast<double>(g[0]) / n;
                       const auto pv = pred.values();
                       const auto tv = target.values();
                       if (pred.requires_grad()) {
                         auto dp = pred.mutable_grad();
                         for (std::size_t i = 0; i < pv.size(); ++i) {
                           dp[i] += static_cast<T>(scale * (static_cast<double>(pv[i]) - tv[i]));
                         }
                       }
                       if (target.requires_grad()) {
                         auto dt = target.mutable_grad();
                         for (std::size_t i = 0; i < pv.size(); ++i) {
                           dt[i] -= static_cast<T>(scale * (static_cast<double>(pv[i]) - tv[i]));
                         }
                       }
                     });
}

template <typename T>
BasicTensor<T> sum(Tape<T>& tape, const BasicTensor<T>& x) {
  double acc = 0.0;
  for (T v : x.values()) acc += v;
  return tape.record({1}, {static_cast<T>(acc)}, {x}, [x](std::span<const T> g) mutable {
    auto dx = x.mutable_grad();
    for (auto& v : dx) v += g[0];
  });
}

template <typename T>
BasicTensor<T> dot(Tape<T>& tape, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("dot", a, b);
  const auto av = a.values();
  const auto bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += static_cast<double>(av[i]) * bv[i];
  return tape.record({1}, {static_cast<T>(acc)}, {a, b}, [a, b](std::span<const T> g) mutable {
    const auto av = a.values();
    const auto bv = b.values();
    if (a.requires_grad()) {
      auto da = a.mutable_grad();
      for (std::size_t i = 0; i < av.size(); ++i) da[i] += g[0] * bv[i];
    }
    if (b.requires_grad()) {
      auto db = b.mutable_grad();
      for (std::size_t i = 0; i < bv.size(); ++i) db[i] += g[0] * av[i];
    }
  });
}

template <typename T>
BasicTensor<T> reshape(Tape<T>& tape, const BasicTensor<T>& x, Shape new_shape) {
  if (shape_numel(new_shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " (" + std::to_string(x.numel()) +
                         " elements) as " + shape_str(new_shape));
  }
  const auto xv = x.values();
  return tape.record(std::move(new_shape), std::vector<T>(xv.begin(), xv.end()), {x},
                     [x](std::span<const T> g) mutable { Tape<T>::accumulate(x, g); });
}

#define VOXDENOISE_INSTANTIATE_OPS(T)                                                                       \
  template BasicTensor<T> linear(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                 const BasicTensor<T>&);                                                    \
  template BasicTensor<T> conv3d(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&,                    \
                                 const BasicTensor<T>&);                                                    \
  template BasicTensor<T> deconv3d(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                   const BasicTensor<T>&);                                                  \
  template BasicTensor<T> layer_norm(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&,                \
                                     const BasicTensor<T>&, double);                                        \
  template BasicTensor<T> batch_norm3d(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&,              \
                                       const BasicTensor<T>&, RunningStats<T>&, NormMode, double, double);  \
  template BasicTensor<T> activation(Tape<T>&, Activation, const BasicTensor<T>&);                          \
  template BasicTensor<T> add(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> mse_loss(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> sum(Tape<T>&, const BasicTensor<T>&);                                             \
  template BasicTensor<T> dot(Tape<T>&, const BasicTensor<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> reshape(Tape<T>&, const BasicTensor<T>&, Shape);

VOXDENOISE_INSTANTIATE_OPS(float)
VOXDENOISE_INSTANTIATE_OPS(double)

#undef VOXDENOISE_INSTANTIATE_OPS

}  // namespace voxdenoise::ops
