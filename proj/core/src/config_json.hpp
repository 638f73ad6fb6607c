// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include "voxdenoise/config.hpp"

namespace voxdenoise::detail {

nlohmann::json model_json(const ModelConfig& c);
nlohmann::json train_json(const TrainConfig& c);
ModelConfig parse_model(const nlohmann::json& j);
TrainConfig parse_train(const nlohmann::json& j);

}  // namespace voxdenoise::detail
