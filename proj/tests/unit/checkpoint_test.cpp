// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "voxdenoise/checkpoint.hpp"
#include "voxdenoise/errors.hpp"

namespace voxdenoise {
namespace {

namespace fs = std::filesystem;

Checkpoint sample_checkpoint() {
  TrainConfig c;
  c.model = ModelConfig::micro();
  c.seed = 9;
  auto model = Model<float>::initialized(c.model, 4);
  auto params = model.parameters();
  auto adam = AdamState::for_parameters(params);
  adam.step = 7;
  for (std::size_t i = 0; i < adam.m.size(); ++i)
    for (std::size_t k = 0; k < adam.m[i].size(); ++k) {
      adam.m[i][k] = 0.001f * static_cast<float>(k + i);
      adam.v[i][k] = 1e-6f * static_cast<float>(k + 1);
    }
  for (auto& [name, stats] : model.buffers()) {
    for (auto& m : stats->mean) m = 0.25f;
    for (auto& v : stats->var) v = 1.5f;
    stats->initialized = true;
  }
  auto ck = snapshot(model, adam, c, 3);
  ck.best_val_psnr = 27.5;
  ck.best_epoch = 2;
  ck.shuffle_seed = 0xabcdef;
  return ck;
}

TEST(Checkpoint, EncodeDecodeEncodeIsBitExact) {
  const auto ck = sample_checkpoint();
  const auto a = encode_checkpoint(ck);
  const auto back = decode_checkpoint(a);
  EXPECT_EQ(encode_checkpoint(back), a);
  EXPECT_EQ(back.epoch, 3u);
  EXPECT_EQ(back.adam, ck.adam);
  EXPECT_EQ(back.config, ck.config);
  EXPECT_EQ(back.best_val_psnr, 27.5);
  EXPECT_EQ(back.shuffle_seed, 0xabcdefu);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = fs::path(::testing::TempDir()) / "ckpt_rt";
  fs::create_directories(dir);
  const auto ck = sample_checkpoint();
  save_checkpoint(ck, dir / "a.ckpt");
  save_checkpoint(load_checkpoint(dir / "a.ckpt"), dir / "b.ckpt");
  EXPECT_EQ(fs::file_size(dir / "a.ckpt"), fs::file_size(dir / "b.ckpt"));
  EXPECT_EQ(encode_checkpoint(load_checkpoint(dir / "b.ckpt")), encode_checkpoint(ck));
}

TEST(Checkpoint, RestoredModelMatchesOriginal) {
  const auto ck = sample_checkpoint();
  auto model = restore_model(decode_checkpoint(encode_checkpoint(ck)));
  const auto params = model.parameters();
  ASSERT_EQ(params.size(), ck.parameters.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(params[i].first, ck.parameters[i].first);
    const auto a = params[i].second.values(), b = ck.parameters[i].second.values();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  for (auto& [name, stats] : model.buffers()) {
    EXPECT_TRUE(stats->initialized);
    EXPECT_EQ(stats->mean[0], 0.25f);
  }
}

TEST(Checkpoint, SnapshotIsADeepCopy) {
  TrainConfig c;
  c.model = ModelConfig::micro();
  auto model = Model<float>::initialized(c.model, 1);
  auto params = model.parameters();
  const auto ck = snapshot(model, AdamState::for_parameters(params), c, 0);
  const float before = ck.parameters[0].second.values()[0];
  params[0].second.mutable_values()[0] += 1.0f;
  EXPECT_EQ(ck.parameters[0].second.values()[0], before);
}

TEST(Checkpoint, ShapeMismatchOnRestore) {
  auto ck = sample_checkpoint();
  ck.config.model.mlp_hidden += 1;
  EXPECT_THROW(restore_model(ck), DimensionError);
  auto renamed = sample_checkpoint();
  renamed.parameters[0].first = "bogus";
  EXPECT_THROW(restore_model(renamed), DimensionError);
}

TEST(Checkpoint, CorruptBytes) {
  const auto good = encode_checkpoint(sample_checkpoint());
  auto bad = good;
  bad[1] = 'Z';
  EXPECT_THROW(decode_checkpoint(bad), BadMagicError);
  auto short_ = good;
  short_.resize(good.size() - 8);
  EXPECT_THROW(decode_checkpoint(short_), TruncatedError);
  auto long_ = good;
  long_.push_back(0);
  EXPECT_THROW(decode_checkpoint(long_), LengthMismatchError);
  EXPECT_THROW(load_checkpoint("/nonexistent/x.ckpt"), IoError);
}

}  // namespace
}  // namespace voxdenoise
