// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "voxdenoise/adam.hpp"
#include "voxdenoise/errors.hpp"

namespace voxdenoise {
namespace {

std::vector<NamedTensor<float>> params_with_grads(const std::vector<float>& values, const std::vector<float>& grads) {
  Tensor t = Tensor::from({values.size()}, values, true);
  auto g = t.mutable_grad();
  std::copy(grads.begin(), grads.end(), g.begin());
  return {{"w", t}};
}

TEST(Adam, ZeroGradientsLeaveParametersUnchanged) {
  auto p = params_with_grads({1.0f, -2.0f, 3.0f}, {0.0f, 0.0f, 0.0f});
  auto state = AdamState::for_parameters(p);
  adam_step(p, state, {});
  EXPECT_EQ(state.step, 1u);
  const auto v = p[0].second.values();
  EXPECT_EQ(v[0], 1.0f);
  EXPECT_EQ(v[1], -2.0f);
  EXPECT_EQ(v[2], 3.0f);
}

TEST(Adam, FirstStepMatchesHandComputation) {
  const std::vector<float> w{0.5f, -0.25f, 1.0f, 0.0f};
  const std::vector<float> g{0.3f, -2.0f, 1e-3f, 5.0f};
  auto p = params_with_grads(w, g);
  auto state = AdamState::for_parameters(p);
  AdamHyper h;
  h.learning_rate = 0.01;
  adam_step(p, state, h);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double m = (1 - h.beta1) * g[i], v = (1 - h.beta2) * g[i] * g[i];
    const double mh = m / (1 - h.beta1), vh = v / (1 - h.beta2);
    const double expect = w[i] - h.learning_rate * mh / (std::sqrt(vh) + h.eps);
    EXPECT_NEAR(p[0].second.values()[i], expect, 1e-6) << i;
    EXPECT_NEAR(state.m[0][i], m, 1e-7);
    EXPECT_NEAR(state.v[0][i], v, 1e-9);
  }
}

TEST(Adam, SecondStepBiasCorrection) {
  const std::vector<float> w{1.0f};
  auto p = params_with_grads(w, {0.5f});
  auto state = AdamState::for_parameters(p);
  AdamHyper h;
  h.learning_rate = 0.1;
  adam_step(p, state, h);
  p[0].second.mutable_grad()[0] = -1.0f;
  adam_step(p, state, h);
  double m = 0.1 * 0.5, v = 0.001 * 0.25;
  m = 0.9 * m + 0.1 * -1.0;
  v = 0.999 * v + 0.001 * 1.0;
  const double w1 = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8);
  const double w2 = w1 - 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(p[0].second.values()[0], w2, 1e-6);
  EXPECT_EQ(state.step, 2u);
}

TEST(Adam, IdenticalInputsGiveIdenticalUpdates) {
  auto a = params_with_grads({0.1f, 0.2f}, {0.7f, -0.1f});
  auto b = params_with_grads({0.1f, 0.2f}, {0.7f, -0.1f});
  auto sa = AdamState::for_parameters(a), sb = AdamState::for_parameters(b);
  for (int i = 0; i < 3; ++i) {
    adam_step(a, sa, {});
    adam_step(b, sb, {});
  }
  EXPECT_EQ(sa, sb);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a[0].second.values()[i], b[0].second.values()[i]);
}

TEST(Adam, MissingGradient) {
  std::vector<NamedTensor<float>> p{{"w", Tensor::from({2}, {1.0f, 2.0f}, true)}};
  auto state = AdamState::for_parameters(p);
  EXPECT_THROW(adam_step(p, state, {}), ConfigError);
}

TEST(Adam, StateSizeMismatch) {
  auto p = params_with_grads({1.0f}, {1.0f});
  AdamState state;
  EXPECT_THROW(adam_step(p, state, {}), DimensionError);
}

}  // namespace
}  // namespace voxdenoise
