// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "grad_cases.hpp"

namespace voxdenoise::testing {
namespace {

class OpGradient : public ::testing::TestWithParam<GradCase> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  const auto& c = GetParam();
  const auto r = c.run();
  EXPECT_GT(r.checked, 0u);
  EXPECT_LE(r.rel_error, c.tolerance) << "checked " << r.checked << ", skipped " << r.skipped;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::ValuesIn(op_grad_cases()),
                         [](const auto& info) { return info.param.name; });

TEST(ModelGradient, MicroConfigEveryVariant) {
  for (Variant v : {Variant::kMlpCnn, Variant::kMlpMlp, Variant::kCnnCnn}) {
    for (FinalActivation a : {FinalActivation::kRelu, FinalActivation::kLeakyRelu}) {
      const auto r = micro_model_gradcheck(v, a);
      EXPECT_LE(r.rel_error, 1e-3) << to_string(v) << "/" << to_string(a) << " skipped " << r.skipped;
      EXPECT_GT(r.checked, r.skipped);
    }
  }
}

}  // namespace
}  // namespace voxdenoise::testing
