// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/metrics.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "voxdenoise/errors.hpp"

namespace voxdenoise {

namespace {

void require_same_shape(const Volume& a, const Volume& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shapes " + a.shape().str() + " and " + b.shape().str() + " differ");
  }
}

double mse_to_psnr(double mse, double peak) {
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(peak * peak / mse);
}

std::vector<double> gaussian_window(const SsimParams& p) {
  std::vector<double> w(p.window);
  const double centre = (static_cast<double>(p.window) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.window; ++i) {
    const double t = static_cast<double>(i) - centre;
    w[i] = std::exp(-(t * t) / (2.0 * p.sigma * p.sigma));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

// 'Valid' separable filtering of an h x w image: output is (h-k+1) x (w-k+1).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(h * ow);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * img[r * w + c + t];
      tmp[r * ow + c] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * tmp[(r + t) * ow + c];
      out[r * ow + c] = acc;
    }
  }
  return out;
}

double ssim_slice(const Volume& test, const Volume& ref, std::size_t z, double range, const SsimParams& p,
                  const std::vector<double>& window) {
  const std::size_t h = ref.height(), w = ref.width();
  std::vector<double> x(h * w), y(h * w), xx(h * w), yy(h * w), xy(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double a = test.at(r, c, z), b = ref.at(r, c, z);
      const std::size_t i = r * w + c;
      x[i] = a;
      y[i] = b;
      xx[i] = a * a;
      yy[i] = b * b;
      xy[i] = a * b;
    }
  }
  const auto mx = filter_valid(x, h, w, window);
  const auto my = filter_valid(y, h, w, window);
  const auto sxx = filter_valid(xx, h, w, window);
  const auto syy = filter_valid(yy, h, w, window);
  const auto sxy = filter_valid(xy, h, w, window);
  const double c1 = (p.k1 * range) * (p.k1 * range);
  const double c2 = (p.k2 * range) * (p.k2 * range);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

std::vector<double> ssim_slices(const Volume& test, const Volume& ref, double range, const SsimParams& p) {
  require_same_shape(test, ref, "ssim");
  if (ref.height() < p.window || ref.width() < p.window) {
    throw DomainError("ssim: slice " + std::to_string(ref.height()) + "x" + std::to_string(ref.width()) +
                      " is smaller than the " + std::to_string(p.window) + "x" + std::to_string(p.window) +
                      " window");
  }
  if (!(range > 0.0)) throw DomainError("ssim: dynamic range must be positive (constant reference?)");
  const auto window = gaussian_window(p);
  std::vector<double> out(ref.slices());
  for (std::size_t z = 0; z < ref.slices(); ++z) out[z] = ssim_slice(test, ref, z, range, p, window);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

nlohmann::ordered_json metric_value(double v) {
  if (std::isfinite(v)) return v;
  return format_metric(v);
}

nlohmann::ordered_json row_json(const VolumeMetrics& m) {
  nlohmann::ordered_json j;
  j["volume"] = m.id;
  j["psnr"] = metric_value(m.psnr);
  j["ssim"] = metric_value(m.ssim);
  j["slice_psnr_mean"] = metric_value(m.slice_psnr_mean);
  j["slice_ssim_mean"] = metric_value(m.slice_ssim_mean);
  return j;
}

}  // namespace

double psnr(const Volume& test, const Volume& reference) {
  require_same_shape(test, reference, "psnr");
  const double peak = reference.max();
  if (!(peak > 0.0)) throw DomainError("psnr: reference volume has no positive voxel to use as peak");
  const auto a = test.voxels();
  const auto b = reference.voxels();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return mse_to_psnr(acc / static_cast<double>(a.size()), peak);
}

std::vector<double> psnr_per_slice(const Volume& test, const Volume& reference) {
  require_same_shape(test, reference, "psnr");
  std::vector<double> out(reference.slices());
  const std::size_t plane = reference.height() * reference.width();
  for (std::size_t z = 0; z < reference.slices(); ++z) {
    double peak = 0.0, acc = 0.0;
    for (std::size_t r = 0; r < reference.height(); ++r) {
      for (std::size_t c = 0; c < reference.width(); ++c) {
        const double b = reference.at(r, c, z);
        const double d = static_cast<double>(test.at(r, c, z)) - b;
        peak = std::max(peak, b);
        acc += d * d;
      }
    }
    if (!(peak > 0.0)) throw DomainError("psnr: reference slice " + std::to_string(z) + " has no positive voxel");
    out[z] = mse_to_psnr(acc / static_cast<double>(plane), peak);
  }
  return out;
}

double ssim(const Volume& test, const Volume& reference, const SsimParams& params) {
  return ssim(test, reference, static_cast<double>(reference.max()) - reference.min(), params);
}

double ssim(const Volume& test, const Volume& reference, double data_range, const SsimParams& params) {
  return mean(ssim_slices(test, reference, data_range, params));
}

std::vector<double> ssim_per_slice(const Volume& test, const Volume& reference, const SsimParams& params) {
  return ssim_slices(test, reference, static_cast<double>(reference.max()) - reference.min(), params);
}

VolumeMetrics measure(const std::string& id, const Volume& test, const Volume& reference) {
  VolumeMetrics m;
  m.id = id;
  m.psnr = psnr(test, reference);
  const auto per_slice_ssim = ssim_per_slice(test, reference);
  m.ssim = mean(per_slice_ssim);
  m.slice_ssim_mean = m.ssim;
  m.slice_psnr_mean = mean(psnr_per_slice(test, reference));
  return m;
}

VolumeMetrics mean_of(const std::vector<VolumeMetrics>& rows, const std::string& id) {
  VolumeMetrics m;
  m.id = id;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.psnr += r.psnr;
    m.ssim += r.ssim;
    m.slice_psnr_mean += r.slice_psnr_mean;
    m.slice_ssim_mean += r.slice_ssim_mean;
  }
  const double n = static_cast<double>(rows.size());
  m.psnr /= n;
  m.ssim /= n;
  m.slice_psnr_mean /= n;
  m.slice_ssim_mean /= n;
  return m;
}

void MetricReport::finalize() {
  denoised_mean = mean_of(denoised);
  noisy_mean = mean_of(noisy);
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["psnr_peak"] = "max(reference)";
  j["ssim"] = {{"window", 11}, {"sigma", 1.5}, {"k1", 0.01}, {"k2", 0.03},
               {"data_range", "max(reference)-min(reference)"}, {"mode", "per-slice 2-D, averaged"}};
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < denoised.size(); ++i) {
    auto r = row_json(denoised[i]);
    if (i < noisy.size()) {
      r["noisy_psnr"] = metric_value(noisy[i].psnr);
      r["noisy_ssim"] = metric_value(noisy[i].ssim);
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  auto m = row_json(denoised_mean);
  if (!noisy.empty()) {
    m["noisy_psnr"] = metric_value(noisy_mean.psnr);
    m["noisy_ssim"] = metric_value(noisy_mean.ssim);
  }
  j["mean"] = std::move(m);
  return j.dump(2) + "\n";
}

std::string format_metric(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

}  // namespace voxdenoise
