#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ksapprox/rng.hpp"

using namespace ksapprox;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterStream, MatchesRandomAccess) {
  CounterStream s(42, 7);
  for (std::uint64_t i = 0; i < 101; ++i) {
    EXPECT_EQ(s.uniform(), uniform_at(42, 7, i)) << i;
  }
  EXPECT_EQ(s.position(), 101u);
}

TEST(CounterStream, StreamsAndSeedsDiffer) {
  EXPECT_NE(uniform_at(1, 0, 0), uniform_at(1, 1, 0));
  EXPECT_NE(uniform_at(1, 0, 0), uniform_at(2, 0, 0));
  std::set<double> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(uniform_at(5, r, 0));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(CounterStream, UniformMoments) {
  CounterStream s(3, 0);
  const int n = 200000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sum2 / n, 1.0 / 3, 4 * std::sqrt(4.0 / 45 / n));
}

TEST(CounterStream, ExponentialMoments) {
  CounterStream s(11, 3);
  const int n = 200000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = s.exponential();
    ASSERT_GE(e, 0.0);
    ASSERT_TRUE(std::isfinite(e));
    sum += e;
    sum2 += e * e;
  }
  EXPECT_NEAR(sum / n, 1.0, 4 * std::sqrt(1.0 / n));
  EXPECT_NEAR(sum2 / n, 2.0, 4 * std::sqrt(20.0 / n));
}
