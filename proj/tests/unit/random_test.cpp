/* Copyright 2026 The DDSMC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ddsmc/random.hpp"

namespace ddsmc {
namespace {

using Counter = Philox4x32::Counter;

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const Counter out = Philox4x32::Generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const Counter out = Philox4x32::Generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                           {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const Counter out = Philox4x32::Generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                           {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, SameKeySameStream) {
  CounterRng a(MakeKey(7, RandomDomain::kPropose, 3, 11));
  CounterRng b(MakeKey(7, RandomDomain::kPropose, 3, 11));
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
}

TEST(CounterRng, DistinctKeysDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint32_t p = 0; p < 64; ++p) {
    CounterRng rng(MakeKey(7, RandomDomain::kPropose, 3, p));
    firsts.insert(rng.NextU64());
  }
  CounterRng other(MakeKey(7, RandomDomain::kResample, 3, 0));
  firsts.insert(other.NextU64());
  EXPECT_EQ(firsts.size(), 65u);
}

TEST(CounterRng, UniformIsOpenInterval) {
  CounterRng rng(MakeKey(1, RandomDomain::kTest));
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(CounterRng, NormalMoments) {
  CounterRng rng(MakeKey(2, RandomDomain::kTest));
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(CounterRng, UniformIntCoversRange) {
  CounterRng rng(MakeKey(3, RandomDomain::kTest));
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.UniformInt(5)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 4.0 * std::sqrt(10000 * 0.8));
}

TEST(DeriveSeed, DeterministicAndSpread) {
  EXPECT_EQ(DeriveSeed(1, 2, 3), DeriveSeed(1, 2, 3));
  EXPECT_NE(DeriveSeed(1, 2, 3), DeriveSeed(1, 3, 2));
  EXPECT_NE(DeriveSeed(0, 0, 0), DeriveSeed(0, 0, 1));
}

}  // namespace
}  // namespace ddsmc
