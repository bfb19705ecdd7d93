#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chainlab/rng.hpp"
#include "chainlab/sincos.hpp"

using namespace chainlab;

namespace {

using Block = std::array<std::uint64_t, 4>;

}  // namespace

// Known-answer vectors from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  const Block out = philox4x64({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Block{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL,
                        0x7e68b68aec7ba23bULL}));
}

TEST(Philox, KnownAnswerOnes) {
  const std::uint64_t f = ~0ULL;
  const Block out = philox4x64({f, f, f, f}, {f, f});
  EXPECT_EQ(out, (Block{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL,
                        0xa09caebf594f0ba0ULL}));
}

TEST(Philox, KnownAnswerPi) {
  const Block out = philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
                                0x082efa98ec4e6c89ULL},
                               {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
  EXPECT_EQ(out, (Block{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL,
                        0x57bd43b5e52b7fe6ULL}));
}

TEST(RngStream, WordsAreBlocksInCounterOrder) {
  RngStream rng(11, 3);
  for (std::uint64_t block = 0; block < 3; ++block) {
    const Block expected = philox4x64({block, 0, 0, 0}, {11, 3});
    for (int w = 0; w < 4; ++w) EXPECT_EQ(rng.next_u64(), expected[static_cast<std::size_t>(w)]);
  }
  EXPECT_EQ(rng.counter(), 12u);
}

TEST(RngStream, StartingCounterResumesMidBlock) {
  RngStream a(5, 9);
  for (int i = 0; i < 7; ++i) a.next_u64();
  RngStream b(5, 9, a.counter());
  EXPECT_EQ(b.counter(), 7u);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, CopiesReplayIdentically) {
  RngStream a(1, 2);
  a.normal();
  RngStream b = a;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(1, 0), b(1, 1), c(2, 0);
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(RngStream, ForkIsDeterministicAndDistinct) {
  const RngStream base(42, 7);
  RngStream f1 = base.fork(1), f2 = base.fork(1), g = base.fork(2);
  const auto x = f1.next_u64();
  EXPECT_EQ(x, f2.next_u64());
  EXPECT_NE(x, g.next_u64());
  RngStream copy = base;
  EXPECT_NE(x, copy.next_u64());
}

TEST(RngStream, UniformInOpenInterval) {
  RngStream rng(3, 0);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, NormalMoments) {
  RngStream rng(4, 0);
  const int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RngStream, BelowIsUniform) {
  RngStream rng(6, 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);  // 0.1% point of chi-square with 6 degrees of freedom
}

TEST(SinCos, MatchesLibm) {
  RngStream rng(8, 0);
  for (int i = 0; i < 100000; ++i) {
    const double x = (rng.uniform() - 0.5) * (i % 2 ? 20.0 : 2000.0);
    const SinCos sc = sincos(x);
    EXPECT_NEAR(sc.sin, std::sin(x), 4e-16 * std::max(1.0, std::abs(x) * 1e-3));
    EXPECT_NEAR(sc.cos, std::cos(x), 4e-16 * std::max(1.0, std::abs(x) * 1e-3));
  }
}

TEST(SinCos, QuadrantPoints) {
  const double h = std::numbers::pi / 2;
  EXPECT_NEAR(sincos(h).sin, 1.0, 1e-16);
  EXPECT_NEAR(sincos(h).cos, 0.0, 1e-16);
  EXPECT_NEAR(sincos(-h).sin, -1.0, 1e-16);
  EXPECT_NEAR(sincos(2 * h).cos, -1.0, 1e-16);
  EXPECT_EQ(sincos(0.0).sin, 0.0);
  EXPECT_EQ(sincos(0.0).cos, 1.0);
  EXPECT_EQ(sincos(1e7).sin, std::sin(1e7));
}
