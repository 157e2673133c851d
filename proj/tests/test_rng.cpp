#include <gtest/gtest.h>

#include <cmath>

#include "fksteer/rng.hpp"

namespace {

using fks::Purpose;
using fks::StreamRng;

TEST(StreamRng, SameKeySameStream) {
  StreamRng a(7, Purpose::denoise, 3, 12, 1);
  StreamRng b(7, Purpose::denoise, 3, 12, 1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(StreamRng, KeysSeparateStreams) {
  StreamRng base(7, Purpose::denoise, 3, 12, 1);
  const auto first = base();
  EXPECT_NE(first, StreamRng(8, Purpose::denoise, 3, 12, 1)());
  EXPECT_NE(first, StreamRng(7, Purpose::noise, 3, 12, 1)());
  EXPECT_NE(first, StreamRng(7, Purpose::denoise, 4, 12, 1)());
  EXPECT_NE(first, StreamRng(7, Purpose::denoise, 3, 11, 1)());
  EXPECT_NE(first, StreamRng(7, Purpose::denoise, 3, 12, 2)());
}

TEST(StreamRng, UniformAndNormalMoments) {
  StreamRng rng(1);
  double s = 0.0, n1 = 0.0, n2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    const double z = rng.normal();
    n1 += z;
    n2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(n1 / n, 0.0, 0.01);
  EXPECT_NEAR(n2 / n, 1.0, 0.02);
}

}  // namespace
