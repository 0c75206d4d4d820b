#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "leafnet/random.hpp"

using leafnet::Xoshiro256;

TEST(Xoshiro256, SameSeedSameStream) {
    Xoshiro256 a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs |= x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Xoshiro256, Uniform01StaysInUnitInterval) {
    Xoshiro256 rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Xoshiro256, BelowIsInRangeAndCoversIt) {
    Xoshiro256 rng(9);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.below(7);
        ASSERT_LT(v, 7u);
        ++hits[v];
    }
    for (int h : hits) {
        EXPECT_GT(h, 800);
    }
    EXPECT_EQ(rng.below(1), 0u);
}

TEST(Shuffle, IsAPermutationAndDeterministic) {
    std::vector<int> a(50), b(50);
    std::iota(a.begin(), a.end(), 0);
    b = a;
    Xoshiro256 r1(5), r2(5);
    leafnet::shuffle(std::span<int>(a), r1);
    leafnet::shuffle(std::span<int>(b), r2);
    EXPECT_EQ(a, b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(sorted[i], i);
    }
    EXPECT_FALSE(std::is_sorted(a.begin(), a.end()));
}

TEST(DeriveSeed, StreamsDiffer) {
    EXPECT_NE(leafnet::derive_seed(1, 1), leafnet::derive_seed(1, 2));
    EXPECT_EQ(leafnet::derive_seed(3, 4), leafnet::derive_seed(3, 4));
}
