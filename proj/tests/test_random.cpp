#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dynbv/random.hpp"
#include "oracles.hpp"

using dynbv::Rng;

TEST(Random, SameSeedSameStream) {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a(), b());
    }
}

TEST(Random, DifferentSeedsDiffer) {
    Rng a(1);
    Rng b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        same += a() == b() ? 1 : 0;
    }
    EXPECT_EQ(same, 0);
}

TEST(Random, ReportsItsSeed) {
    EXPECT_EQ(Rng(977).seed(), 977U);
}

TEST(Random, DeriveSeedDependsOnEveryComponent) {
    const auto base = dynbv::derive_seed(7, {1, 2});
    EXPECT_EQ(base, dynbv::derive_seed(7, {1, 2}));
    EXPECT_NE(base, dynbv::derive_seed(8, {1, 2}));
    EXPECT_NE(base, dynbv::derive_seed(7, {2, 1}));
    EXPECT_NE(base, dynbv::derive_seed(7, {1, 3}));
    EXPECT_NE(base, dynbv::derive_seed(7, {1}));
}

TEST(Random, DeriveSeedHasNoCollisionsOnAGrid) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 20; ++m) {
        for (std::uint64_t cell = 0; cell < 20; ++cell) {
            for (std::uint64_t run = 0; run < 20; ++run) {
                seen.insert(dynbv::derive_seed(m, {cell, run}));
            }
        }
    }
    EXPECT_EQ(seen.size(), 8000U);
}

TEST(Random, Mix64IsInjectiveOnSample) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        seen.insert(dynbv::mix64(i));
    }
    EXPECT_EQ(seen.size(), 100000U);
}

TEST(Random, BitIsFair) {
    Rng rng(3);
    int ones = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        ones += rng.bit() ? 1 : 0;
    }
    EXPECT_NEAR(ones / static_cast<double>(trials), 0.5, 0.01);
}

TEST(Random, BelowStaysInRangeAndIsUniform) {
    Rng rng(5);
    std::vector<double> counts(7, 0.0);
    const int trials = 70000;
    for (int i = 0; i < trials; ++i) {
        const auto v = rng.below(7);
        ASSERT_LT(v, 7U);
        counts[v] += 1;
    }
    const std::vector<double> probs(7, 1.0 / 7.0);
    const auto [stat, df] = oracle::chi_square(counts, probs, trials);
    EXPECT_LT(stat, oracle::chi_square_critical_001(df));
}

TEST(Random, BelowRejectsZero) {
    Rng rng(1);
    EXPECT_THROW((void)rng.below(0), std::invalid_argument);
}

TEST(Random, UniformIntInclusiveBounds) {
    Rng rng(9);
    bool lo = false;
    bool hi = false;
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.uniform_int(-2, 2);
        ASSERT_GE(v, -2);
        ASSERT_LE(v, 2);
        lo = lo || v == -2;
        hi = hi || v == 2;
    }
    EXPECT_TRUE(lo && hi);
    EXPECT_THROW((void)rng.uniform_int(3, 2), std::invalid_argument);
}

TEST(Random, Uniform01IsOpenInterval) {
    Rng rng(11);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Random, BernoulliFrequencyAndEdges) {
    Rng rng(13);
    int hits = 0;
    for (int i = 0; i < 100000; ++i) {
        hits += rng.bernoulli(0.3) ? 1 : 0;
    }
    EXPECT_NEAR(hits / 100000.0, 0.3, 0.005);
    for (int i = 0; i < 100; ++i) {
        EXPECT_FALSE(rng.bernoulli(0.0));
        EXPECT_TRUE(rng.bernoulli(1.0));
    }
}

TEST(Random, BinomialMatchesPmf) {
    Rng rng(17);
    const std::uint64_t n = 100;
    const double p = 0.015;
    const int trials = 100000;
    std::vector<double> counts(n + 1, 0.0);
    for (int i = 0; i < trials; ++i) {
        const auto k = rng.binomial(n, p);
        ASSERT_LE(k, n);
        counts[k] += 1;
    }
    std::vector<double> probs(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        probs[k] = oracle::binomial_pmf(n, k, p);
    }
    const auto [stat, df] = oracle::chi_square(counts, probs, trials);
    EXPECT_LT(stat, oracle::chi_square_critical_001(df));
}

TEST(Random, BinomialEdges) {
    Rng rng(19);
    EXPECT_EQ(rng.binomial(50, 0.0), 0U);
    EXPECT_EQ(rng.binomial(50, 1.0), 50U);
    EXPECT_EQ(rng.binomial(0, 0.5), 0U);
}

TEST(Random, SatisfiesStdUniformRandomBitGenerator) {
    static_assert(std::uniform_random_bit_generator<Rng>);
    Rng rng(23);
    std::vector<int> v{1, 2, 3, 4, 5};
    std::shuffle(v.begin(), v.end(), rng);
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v, (std::vector<int>{1, 2, 3, 4, 5}));
}
