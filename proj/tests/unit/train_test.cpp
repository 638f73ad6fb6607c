// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "voxdenoise/errors.hpp"
#include "voxdenoise/noise.hpp"
#include "voxdenoise/train.hpp"

namespace voxdenoise {
namespace {

namespace fs = std::filesystem;

VolumePair smooth_pair(std::string id, std::uint64_t seed, VolumeShape s = {8, 8, 2}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  Volume clean(s);
  for (std::size_t r = 0; r < s.height; ++r)
    for (std::size_t q = 0; q < s.width; ++q)
      for (std::size_t z = 0; z < s.slices; ++z)
        clean.at(r, q, z) = static_cast<float>(0.5 * a + 0.3 * b * std::sin(0.4 * r) + 0.2 * c * std::cos(0.5 * q) + 0.05 * z);
  Volume noisy = add_rician(clean, {0.15, seed + 100});
  return {std::move(id), std::move(clean), std::move(noisy)};
}

TrainConfig micro_config(Variant variant = Variant::kMlpCnn) {
  TrainConfig c;
  c.model = ModelConfig::micro();
  c.model.variant = variant;
  c.batch_size = 4;
  c.epochs = 6;
  c.learning_rate = 5e-3;
  c.patch_stride = 4;
  c.seed = 11;
  return c;
}

// Two 8x8x2 volumes at stride 4: 8 training patches.
TrainingData micro_data(bool with_val = true) {
  TrainingData data;
  std::vector<VolumePair> train{smooth_pair("t0", 1), smooth_pair("t1", 2)};
  data.train = build_patch_dataset(train, 4, 4);
  if (with_val) data.val = {smooth_pair("v0", 3, {12, 12, 2})};
  data.test = {smooth_pair("s0", 4, {12, 12, 2})};
  return data;
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::path(::testing::TempDir()) / name;
  fs::remove_all(p);
  return p;
}

TEST(Train, LossDecreasesOnSmallSet) {
  const auto data = micro_data();
  ASSERT_EQ(data.train.size(), 8u);
  auto c = micro_config();
  c.epochs = 30;
  const auto r = train(c, data);
  ASSERT_EQ(r.epochs.size(), 30u);
  EXPECT_LT(r.epochs.back().train_loss, r.epochs.front().train_loss);
  EXPECT_EQ(r.losses.size(), 30u * 2);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  auto c = micro_config();
  c.learning_rate = 0.0;
  c.epochs = 2;
  const auto r = train(c, micro_data());
  const auto init = Model<float>::initialized(c.model, init_seed(c));
  const auto params = init.parameters();
  ASSERT_EQ(params.size(), r.last.parameters.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto x = params[i].second.values(), y = r.last.parameters[i].second.values();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end())) << params[i].first;
  }
}

TEST(Train, DeterministicAcrossRuns) {
  const auto data = micro_data();
  const auto a = train(micro_config(), data), b = train(micro_config(), data);
  EXPECT_EQ(encode_checkpoint(a.last), encode_checkpoint(b.last));
  ASSERT_EQ(a.losses.size(), b.losses.size());
  for (std::size_t i = 0; i < a.losses.size(); ++i) EXPECT_EQ(a.losses[i].loss, b.losses[i].loss);
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  const auto data = micro_data();
  const auto c = micro_config();
  const auto full = train(c, data);

  const auto dir = fresh_dir("resume_run");
  TrainOptions first;
  first.out_dir = dir;
  first.stop_after = 3;
  const auto part = train(c, data, first);
  EXPECT_EQ(part.last.epoch, 3u);
  ASSERT_TRUE(fs::exists(dir / "last.ckpt"));

  TrainOptions second;
  second.out_dir = dir;
  second.resume = load_checkpoint(dir / "last.ckpt");
  const auto rest = train(c, data, second);
  EXPECT_EQ(encode_checkpoint(rest.last), encode_checkpoint(full.last));
  EXPECT_EQ(encode_checkpoint(rest.best), encode_checkpoint(full.best));
  ASSERT_EQ(rest.losses.size(), full.losses.size());
  for (std::size_t i = 0; i < full.losses.size(); ++i) EXPECT_EQ(rest.losses[i].loss, full.losses[i].loss);
}

TEST(Train, WritesArtifacts) {
  const auto dir = fresh_dir("artifacts_run");
  TrainOptions o;
  o.out_dir = dir;
  auto c = micro_config();
  c.epochs = 2;
  const auto r = train(c, micro_data(), o);
  EXPECT_TRUE(fs::exists(dir / "last.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "best.ckpt"));
  std::ifstream in(dir / "loss.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "epoch,batch,loss");
  EXPECT_EQ(load_checkpoint(dir / "last.ckpt").epoch, 2u);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(dir / "best.ckpt")), encode_checkpoint(r.best));
}

TEST(Train, BestCheckpointHasHighestValidationPsnr) {
  const auto r = train(micro_config(), micro_data());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < r.epochs.size(); ++i)
    if (r.epochs[i].val_psnr > r.epochs[arg].val_psnr) arg = i;
  EXPECT_EQ(r.best.epoch, r.epochs[arg].epoch);
  EXPECT_EQ(r.best.best_val_psnr, r.epochs[arg].val_psnr);
}

TEST(Train, NonFiniteLossAborts) {
  auto data = micro_data();
  data.train.noisy[5] = std::numeric_limits<float>::quiet_NaN();
  try {
    train(micro_config(), data);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("norm"), std::string::npos);
  }
}

TEST(Train, PatchLengthMismatch) {
  auto c = micro_config();
  c.model.slices = 3;
  EXPECT_THROW(train(c, micro_data()), DimensionError);
}

TEST(Train, LearningRateHook) {
  TrainOptions o;
  o.lr_schedule = [](std::size_t epoch, double base) { return base / static_cast<double>(epoch); };
  auto c = micro_config();
  c.epochs = 3;
  const auto r = train(c, micro_data(), o);
  EXPECT_DOUBLE_EQ(r.epochs[2].learning_rate, c.learning_rate / 3.0);
}

TEST(Evaluate, IdentityModelReturnsNoisyInput) {
  ModelConfig m = ModelConfig::micro();
  m.variant = Variant::kMlpMlp;
  Model<float> model(m);
  model.zero_mlp_weights();
  const std::vector<VolumePair> pairs{smooth_pair("a", 5, {13, 11, 2})};
  std::vector<Volume> out;
  const auto report = evaluate_model(model, pairs, 3, &out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], pairs[0].noisy);
  EXPECT_EQ(report.denoised[0].psnr, report.noisy[0].psnr);
}

TEST(Evaluate, DeterministicAndShapePreserving) {
  const auto r = train(micro_config(), micro_data());
  const auto data = micro_data();
  const auto a = evaluate(r.best, data.test), b = evaluate(r.best, data.test);
  EXPECT_EQ(a.denoised_mean.psnr, b.denoised_mean.psnr);
  EXPECT_EQ(a.denoised_mean.ssim, b.denoised_mean.ssim);
  auto model = restore_model(r.best);
  const auto den = denoise_volume(model, data.test[0].noisy, 2);
  EXPECT_EQ(den.shape(), data.test[0].noisy.shape());
}

TEST(Evaluate, VolumeNotFittingModel) {
  const auto r = train(micro_config(), micro_data());
  const std::vector<VolumePair> pairs{smooth_pair("x", 6, {12, 12, 3})};
  EXPECT_THROW(evaluate(r.best, pairs), DimensionError);
}

TEST(LossCurve, Csv) {
  const std::vector<LossRecord> l{{1, 0, 0.5}, {1, 1, 0.25}};
  const auto csv = loss_curve_csv(l);
  EXPECT_EQ(csv.substr(0, 17), "epoch,batch,loss\n");
  EXPECT_NE(csv.find("1,1,0.25"), std::string::npos);
}

TEST(Ablate, ProducesThreeRowsInOrder) {
  auto c = micro_config();
  c.epochs = 3;
  std::vector<Variant> seen;
  const auto t = ablate(c, micro_data(), nullptr, [&](Variant v, const TrainResult&) { seen.push_back(v); });
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].variant, Variant::kMlpMlp);
  EXPECT_EQ(t.rows[1].variant, Variant::kCnnCnn);
  EXPECT_EQ(t.rows[2].variant, Variant::kMlpCnn);
  EXPECT_EQ(seen.size(), 3u);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.error.empty());
    EXPECT_TRUE(std::isfinite(r.psnr));
  }
  EXPECT_NE(t.to_markdown().find("MLP+CNN"), std::string::npos);
  EXPECT_NE(t.to_json().find("\"hybrid_best\""), std::string::npos);
}

}  // namespace
}  // namespace voxdenoise
