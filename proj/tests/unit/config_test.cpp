// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "voxdenoise/config.hpp"
#include "voxdenoise/errors.hpp"

namespace voxdenoise {
namespace {

TEST(Config, JsonRoundTrip) {
  TrainConfig c = TrainConfig::desk_scale();
  c.seed = 123456789012345ULL;
  c.learning_rate = 1.25e-4;
  c.model.variant = Variant::kCnnCnn;
  c.model.final_activation = FinalActivation::kLeakyRelu;
  c.mixed_levels = true;
  const auto back = train_config_from_json(to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, ModelRoundTrip) {
  for (const auto& m : {ModelConfig::standard(), ModelConfig::desk_scale(), ModelConfig::micro()}) {
    EXPECT_EQ(model_config_from_json(to_json(m)), m);
  }
}

TEST(Config, PartialJsonKeepsDefaults) {
  const auto c = train_config_from_json(R"({"epochs": 3, "model": {"mlp_blocks": 1}})");
  EXPECT_EQ(c.epochs, 3u);
  EXPECT_EQ(c.model.mlp_blocks, 1u);
  EXPECT_EQ(c.batch_size, TrainConfig::desk_scale().batch_size);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(train_config_from_json(R"({"epochz": 3})"), ConfigError);
  EXPECT_THROW(train_config_from_json(R"({"model": {"depth": 3}})"), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_THROW(train_config_from_json(R"({"model": {"mlp_blocks": 0}})"), ConfigError);
  EXPECT_THROW(train_config_from_json(R"({"batch_size": 0})"), ConfigError);
  EXPECT_THROW(train_config_from_json(R"({"noise_level": 1.5})"), ConfigError);
  EXPECT_THROW(train_config_from_json(R"({"epochs": "ten"})"), ConfigError);
  EXPECT_THROW(train_config_from_json("not json"), ConfigError);
  EXPECT_THROW(train_config_from_json("[1, 2]"), ConfigError);
}

TEST(Config, DeskScalePreset) {
  const auto c = TrainConfig::desk_scale();
  EXPECT_EQ(c.n_train, 20u);
  EXPECT_EQ(c.n_val, 5u);
  EXPECT_EQ(c.n_test, 5u);
  EXPECT_DOUBLE_EQ(c.noise_level, 0.15);
  EXPECT_EQ(c.model.mlp_blocks, 2u);
  EXPECT_EQ(c.model.cnn_levels, 2u);
  EXPECT_EQ(c.model.channels, (std::vector<std::size_t>{16, 32}));
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.epochs, 50u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 5e-4);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_train_config("/nonexistent/config.json"), IoError); }

}  // namespace
}  // namespace voxdenoise
