// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "voxdenoise/errors.hpp"
#include "voxdenoise/metrics.hpp"
#include "voxdenoise/noise.hpp"
#include "voxdenoise/phantom.hpp"

namespace voxdenoise {
namespace {

Volume random_volume(VolumeShape s, std::mt19937_64& rng, float lo = 0.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> v(s.voxels());
  for (auto& x : v) x = u(rng);
  return Volume(s, std::move(v));
}

double direct_psnr(const Volume& test, const Volume& ref) {
  double peak = -INFINITY, se = 0.0;
  for (std::size_t i = 0; i < ref.voxels().size(); ++i) {
    peak = std::max(peak, static_cast<double>(ref.voxels()[i]));
    const double e = static_cast<double>(test.voxels()[i]) - ref.voxels()[i];
    se += e * e;
  }
  return 20.0 * std::log10(peak) - 10.0 * std::log10(se / static_cast<double>(ref.voxels().size()));
}

// Brute-force 2-D windows with an explicit 11 x 11 Gaussian.
double direct_ssim(const Volume& x, const Volume& y) {
  const auto& s = x.shape();
  double w[11][11], tot = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) tot += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
  const double range = static_cast<double>(y.max()) - y.min();
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double total = 0.0;
  for (std::size_t z = 0; z < s.slices; ++z) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r + 11 <= s.height; ++r)
      for (std::size_t c = 0; c + 11 <= s.width; ++c) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double k = w[i][j] / tot, a = x.at(r + i, c + j, z), b = y.at(r + i, c + j, z);
            mx += k * a;
            my += k * b;
            xx += k * a * a;
            yy += k * b * b;
            xy += k * a * b;
          }
        const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
        acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++n;
      }
    total += acc / static_cast<double>(n);
  }
  return total / static_cast<double>(s.slices);
}

TEST(Psnr, IdenticalIsInfinity) {
  std::mt19937_64 rng(1);
  const auto v = random_volume({12, 12, 2}, rng);
  EXPECT_EQ(psnr(v, v), kPsnrIdentical);
  EXPECT_TRUE(std::isinf(psnr(v, v)));
  EXPECT_EQ(format_metric(psnr(v, v)), "inf");
}

TEST(Psnr, ClosedForm) {
  Volume ref({10, 10, 1}, 0.5f);
  ref.at(0, 0, 0) = 1.0f;
  Volume test = ref;
  // MSE 0.01 from a uniform offset of 0.1.
  for (auto& v : test.voxels()) v += 0.1f;
  EXPECT_NEAR(psnr(test, ref), 20.0, 1e-5);
}

TEST(Psnr, MatchesDirectReimplementation) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto ref = random_volume({20, 17, 3}, rng);
    const auto test = random_volume({20, 17, 3}, rng);
    EXPECT_NEAR(psnr(test, ref), direct_psnr(test, ref), 1e-9);
  }
}

TEST(Psnr, Errors) {
  EXPECT_THROW(psnr(Volume({2, 2, 1}), Volume({2, 3, 1})), DimensionError);
  EXPECT_THROW(psnr(Volume({2, 2, 1}, 1.0f), Volume({2, 2, 1})), DomainError);
}

TEST(Psnr, PositiveBelowPeakError) {
  std::mt19937_64 rng(3);
  const auto ref = random_volume({8, 8, 1}, rng, 0.5f, 1.0f);
  const auto test = random_volume({8, 8, 1}, rng, 0.5f, 1.0f);
  EXPECT_GT(psnr(test, ref), 0.0);
}

TEST(Ssim, IdenticalIsOne) {
  std::mt19937_64 rng(4);
  const auto v = random_volume({20, 24, 3}, rng);
  EXPECT_NEAR(ssim(v, v), 1.0, 1e-9);
}

TEST(Ssim, MatchesBruteForceWindows) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    const auto ref = random_volume({23, 19, 2}, rng);
    const auto test = random_volume({23, 19, 2}, rng);
    EXPECT_NEAR(ssim(test, ref), direct_ssim(test, ref), 1e-9);
  }
}

TEST(Ssim, InvertedContrastScoresLow) {
  const auto ref = generate_phantom(PhantomSpec{}).clean;
  std::vector<float> inv(ref.voxels().begin(), ref.voxels().end());
  const float hi = ref.max(), lo = ref.min();
  for (auto& v : inv) v = hi + lo - v;
  const double s = ssim(Volume(ref.shape(), inv), ref);
  EXPECT_LT(s, 0.5);
}

TEST(Ssim, SymmetricUnderFixedRange) {
  std::mt19937_64 rng(6);
  const auto a = random_volume({16, 16, 2}, rng), b = random_volume({16, 16, 2}, rng);
  EXPECT_NEAR(ssim(a, b, 1.0), ssim(b, a, 1.0), 1e-12);
}

TEST(Ssim, BoundedAndDecreasingWithNoise) {
  const auto ref = generate_phantom(PhantomSpec{}).clean;
  double last = 1.0;
  for (double level : kStandardNoiseLevels) {
    const double s = ssim(add_rician(ref, {level, 17}), ref);
    EXPECT_LE(s, 1.0);
    EXPECT_LT(s, last);
    last = s;
  }
}

TEST(Ssim, WindowLargerThanSlice) {
  EXPECT_THROW(ssim(Volume({10, 20, 1}, 1.0f), Volume({10, 20, 1}, 1.0f)), DomainError);
}

TEST(Report, JsonHasRowsAndMean) {
  std::mt19937_64 rng(7);
  MetricReport r;
  for (int i = 0; i < 2; ++i) {
    const auto ref = random_volume({12, 12, 2}, rng);
    const auto noisy = random_volume({12, 12, 2}, rng);
    r.denoised.push_back(measure("v" + std::to_string(i), ref, ref));
    r.noisy.push_back(measure("v" + std::to_string(i), noisy, ref));
  }
  r.finalize();
  const auto j = nlohmann::json::parse(r.to_json());
  ASSERT_TRUE(j.contains("rows"));
  EXPECT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][1]["volume"], "v1");
  ASSERT_TRUE(j.contains("mean"));
  EXPECT_EQ(j["rows"][0]["psnr"], "inf");
  EXPECT_NEAR(j["rows"][0]["noisy_psnr"].get<double>(), r.noisy[0].psnr, 1e-12);
}

}  // namespace
}  // namespace voxdenoise
