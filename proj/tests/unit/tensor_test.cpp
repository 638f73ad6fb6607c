// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "voxdenoise/errors.hpp"
#include "voxdenoise/ops.hpp"
#include "voxdenoise/tensor.hpp"

namespace voxdenoise {
namespace {

TEST(Tensor, ShapeAndValuesAgree) {
  const auto t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(1), 3u);
  EXPECT_FALSE(t.has_grad());
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
}

TEST(Tensor, CloneIsDeep) {
  auto a = Tensor::from({2}, {1, 2});
  auto b = a.clone();
  b.mutable_values()[0] = 9;
  EXPECT_EQ(a.values()[0], 1.0f);
  EXPECT_FALSE(a.same_storage(b));
}

TEST(Tape, SumGradientIsOnes) {
  auto x = Tensor::from({4}, {1, -2, 3, 0.5f}, true);
  Tape32 tape;
  tape.backward(ops::sum(tape, x));
  ASSERT_TRUE(x.has_grad());
  for (float g : x.grad()) EXPECT_EQ(g, 1.0f);
}

TEST(Tape, DiamondAccumulates) {
  auto x = Tensor::from({3}, {1, 2, 3}, true);
  Tape32 tape;
  tape.backward(ops::sum(tape, ops::add(tape, x, x)));
  for (float g : x.grad()) EXPECT_EQ(g, 2.0f);
}

TEST(Tape, SecondBackwardIsAnError) {
  auto x = Tensor::from({2}, {1, 2}, true);
  Tape32 tape;
  const auto loss = ops::sum(tape, x);
  tape.backward(loss);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(loss), TapeError);
}

TEST(Tape, NonScalarLossIsAnError) {
  auto x = Tensor::from({2}, {1, 2}, true);
  Tape32 tape;
  const auto y = ops::add(tape, x, x);
  EXPECT_THROW(tape.backward(y), TapeError);
}

TEST(Tape, LossFromAnotherTapeIsAnError) {
  auto x = Tensor::from({2}, {1, 2}, true);
  Tape32 a, b;
  const auto loss = ops::sum(a, x);
  EXPECT_THROW(b.backward(loss), TapeError);
}

TEST(Tape, ConstantsRecordNothing) {
  const auto x = Tensor::from({2}, {1, 2});
  Tape32 tape;
  const auto y = ops::add(tape, x, x);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Tape, UnreachedInputsGetNoGradient) {
  auto x = Tensor::from({2}, {1, 2}, true);
  auto z = Tensor::from({2}, {3, 4}, true);
  Tape32 tape;
  const auto unused = ops::add(tape, z, z);
  tape.backward(ops::sum(tape, x));
  EXPECT_TRUE(x.has_grad());
  EXPECT_FALSE(z.has_grad());
  (void)unused;
}

TEST(Tape, GradientsAccumulateAcrossTapesUntilCleared) {
  auto x = Tensor::from({2}, {1, 2}, true);
  for (int i = 0; i < 2; ++i) {
    Tape32 tape;
    tape.backward(ops::sum(tape, x));
  }
  EXPECT_EQ(x.grad()[0], 2.0f);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

}  // namespace
}  // namespace voxdenoise
