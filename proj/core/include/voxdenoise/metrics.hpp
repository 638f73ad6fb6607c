// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "voxdenoise/volume.hpp"

namespace voxdenoise {

/// Returned by psnr() for identical inputs; serialized as "inf".
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// 10 log10(peak^2 / MSE) with peak = max(reference).
double psnr(const Volume& test, const Volume& reference);

/// Mean single-scale SSIM over the C slices, each computed in 2-D with a
/// Gaussian window. The dynamic range is max(reference) - min(reference).
double ssim(const Volume& test, const Volume& reference, const SsimParams& params = {});
/// As above with an explicit dynamic range, which makes the index symmetric.
double ssim(const Volume& test, const Volume& reference, double data_range, const SsimParams& params = {});

/// SSIM of each slice (dynamic range taken from the whole reference volume).
std::vector<double> ssim_per_slice(const Volume& test, const Volume& reference, const SsimParams& params = {});
/// PSNR of each slice with that slice's reference maximum as peak.
std::vector<double> psnr_per_slice(const Volume& test, const Volume& reference);

struct VolumeMetrics {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double slice_psnr_mean = 0.0;
  double slice_ssim_mean = 0.0;
};

VolumeMetrics measure(const std::string& id, const Volume& test, const Volume& reference);

/// Per-volume rows plus their mean for a denoised set and its noisy input.
struct MetricReport {
  std::vector<VolumeMetrics> denoised;
  std::vector<VolumeMetrics> noisy;
  VolumeMetrics denoised_mean;
  VolumeMetrics noisy_mean;

  void finalize();
  std::string to_json() const;
};

VolumeMetrics mean_of(const std::vector<VolumeMetrics>& rows, const std::string& id = "mean");

/// JSON number, or the string "inf"/"-inf"/"nan" for non-finite values.
std::string format_metric(double value);

}  // namespace voxdenoise
