#include <gtest/gtest.h>

#include <cmath>

#include "neatnav/random.hpp"

using namespace neatnav;

TEST(Random, SameSeedSameStream) {
    Random a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Random, UniformInUnitInterval) {
    Random r(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Random, IndexCoversRangeUniformly) {
    Random r(2);
    int counts[5] = {};
    for (int i = 0; i < 50000; ++i) ++counts[r.index(5)];
    for (int c : counts) EXPECT_NEAR(c / 50000.0, 0.2, 0.01);
}

TEST(Random, GaussianMoments) {
    Random r(3);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = r.gaussian();
        s += g;
        s2 += g * g;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(DeriveSeed, PureAndOrderSensitive) {
    EXPECT_EQ(derive_seed({1, 2, 3}), derive_seed({1, 2, 3}));
    EXPECT_NE(derive_seed({1, 2, 3}), derive_seed({3, 2, 1}));
    EXPECT_NE(derive_seed({1, 2}), derive_seed({1, 2, 0}));
}
