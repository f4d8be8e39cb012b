#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "dynbv/drift.hpp"
#include "oracles.hpp"

using dynbv::AlgorithmConfig;
using dynbv::AnalyticDriftParams;
using dynbv::DriftModel;
using dynbv::EnvironmentSpec;
using dynbv::Rng;
using dynbv::Variant;

namespace {

const AlgorithmConfig kEA2{2, 1.0, Variant::EA, 0.5};

AnalyticDriftParams at(double c, std::size_t y = 1) { return {c, 3000, y, dynbv::kDefaultRMax, 0}; }

} // namespace

TEST(DriftSample, OnePlusOneDeltasAndMean) {
    const AlgorithmConfig cfg{1, 1.0, Variant::EA, 0.5};
    dynbv::DriftSampler sampler(cfg, EnvironmentSpec{}, 3000);
    Rng rng(1);
    std::map<std::int64_t, int> hist;
    double sum = 0.0;
    const int samples = 2000;
    for (int i = 0; i < samples; ++i) {
        const auto d = sampler.sample(1, dynbv::kDefaultDriftSampleCap, rng);
        ASSERT_TRUE(d.has_value());
        ASSERT_LE(*d, 1);
        ++hist[*d];
        sum += static_cast<double>(*d);
    }
    EXPECT_GT(sum / samples, 0.0);
    // Accepted offspring flip the zero-bit plus r one-bits with weight
    // e^-1 / (r! (r+1)), so r = 0 has probability 1/(e-1).
    EXPECT_NEAR(hist[1] / static_cast<double>(samples), 1.0 / (std::numbers::e - 1.0), 0.04);
}

TEST(DriftSample, DeltaBoundedAndRejectsBadY) {
    Rng rng(2);
    dynbv::DriftSampler sampler(kEA2, EnvironmentSpec{}, 40);
    for (int i = 0; i < 200; ++i) {
        const auto d = sampler.sample(1 + rng.below(40), 100000, rng);
        ASSERT_TRUE(d.has_value());
        EXPECT_LE(std::abs(*d), 40);
    }
    EXPECT_THROW((void)sampler.sample(0, 10, rng), std::invalid_argument);
    EXPECT_THROW((void)sampler.sample(41, 10, rng), std::invalid_argument);
}

TEST(DriftSample, CopiesAloneNeverEndASample) {
    // A negligible mutation rate produces only copies, so the sample runs
    // into its cap.
    const AlgorithmConfig cfg{2, 1e-9, Variant::EA, 0.5};
    dynbv::DriftSampler sampler(cfg, EnvironmentSpec{}, 100);
    Rng rng(3);
    EXPECT_FALSE(sampler.sample(5, 2000, rng).has_value());
}

TEST(McDrift, AggregatesAndIsWorkerInvariant) {
    const AlgorithmConfig cfg{2, 2.0, Variant::GA, 0.5};
    Rng a(4);
    Rng b(4);
    const auto one = dynbv::mc_drift(cfg, EnvironmentSpec{}, 200, 3, 400, 100000, a, 1);
    const auto four = dynbv::mc_drift(cfg, EnvironmentSpec{}, 200, 3, 400, 100000, b, 4);
    EXPECT_EQ(one.mean, four.mean);
    EXPECT_EQ(one.std_dev, four.std_dev);
    EXPECT_EQ(one.samples, 400U);
    EXPECT_EQ(one.timeouts, 0U);
    EXPECT_DOUBLE_EQ(one.std_err, one.std_dev / std::sqrt(400.0));
    EXPECT_THROW((void)dynbv::mc_drift(cfg, EnvironmentSpec{}, 200, 3, 0, 100, a), std::invalid_argument);
    EXPECT_THROW((void)dynbv::mc_drift(cfg, EnvironmentSpec{}, 200, 0, 10, 100, a), std::invalid_argument);
}

TEST(McDrift, TimeoutsCountedSeparately) {
    const AlgorithmConfig cfg{2, 1e-9, Variant::EA, 0.5};
    Rng rng(5);
    const auto est = dynbv::mc_drift(cfg, EnvironmentSpec{}, 50, 2, 20, 50, rng);
    EXPECT_EQ(est.timeouts, 20U);
    EXPECT_EQ(est.samples, 0U);
    EXPECT_TRUE(std::isnan(est.mean));
}

TEST(DriftProfile, GridOfOneEqualsMcDrift) {
    const AlgorithmConfig cfg{2, 1.5, Variant::EA, 0.5};
    Rng a(6);
    Rng b(6);
    const std::vector<std::size_t> grid{4};
    const auto prof = dynbv::drift_profile(cfg, EnvironmentSpec{}, 300, grid, 300, 100000, a);
    const auto single = dynbv::mc_drift(cfg, EnvironmentSpec{}, 300, 4, 300, 100000, b);
    ASSERT_EQ(prof.size(), 1U);
    EXPECT_EQ(prof[0].mean, single.mean);
    EXPECT_THROW((void)dynbv::drift_profile(cfg, EnvironmentSpec{}, 300, {}, 10, 10, a), std::invalid_argument);
}

TEST(DriftProfile, CsvHeader) {
    std::ostringstream out;
    dynbv::DriftEstimate e;
    e.y = 3;
    e.mean = 0.5;
    e.samples = 10;
    dynbv::write_drift_csv(out, kEA2, 100, std::vector<dynbv::DriftEstimate>{e});
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "algorithm,mu,c,n,y,mean,std_dev,std_err,samples,timeouts");
    EXPECT_NE(out.str().find("EA,2,1,100,3,0.5,"), std::string::npos);
}

TEST(EaStateValue, ClosedForm) {
    EXPECT_DOUBLE_EQ(dynbv::ea_state_value(1), 0.0);
    EXPECT_DOUBLE_EQ(dynbv::ea_state_value(2), -1.0 / 3.0);
    double prev = 0.0;
    for (std::size_t r = 1; r < 2000; ++r) {
        const double v = dynbv::ea_state_value(r);
        EXPECT_GT(v, -1.0);
        EXPECT_LE(v, prev);
        prev = v;
    }
    EXPECT_NEAR(dynbv::ea_state_value(1000000), -1.0, 1e-5);
    EXPECT_THROW((void)dynbv::ea_state_value(0), std::invalid_argument);
}

TEST(EaStateValue, MatchesBalanceEquation) {
    // 2F = sum_s p_s (r+2s+1)/(r+s+1) F + sum_s p_s (1-r)/(r+s+1).
    for (double c : {0.5, 1.0, 2.0, 4.0}) {
        const auto p = dynbv::poisson_weights(c, dynbv::poisson_cutoff(c));
        for (std::size_t r = 1; r <= 10; ++r) {
            const double rr = static_cast<double>(r);
            const double f = dynbv::ea_state_value(r);
            double rhs = 0.0;
            for (std::size_t s = 0; s < p.size(); ++s) {
                const double ss = static_cast<double>(s);
                rhs += p[s] * (rr + 2 * ss + 1) / (rr + ss + 1) * f + p[s] * (1 - rr) / (rr + ss + 1);
            }
            EXPECT_NEAR(2 * f, rhs, 1e-12);
        }
    }
}

TEST(GaStateValue, BaseCaseAndBound) {
    for (double c = 0.2; c <= 5.0; c += 0.2) {
        const auto f = dynbv::ga_state_values(c, 60);
        for (std::size_t r = 1; r <= 60; ++r) {
            EXPECT_LE(f[r], 1.0) << "c=" << c << " r=" << r;
            EXPECT_GT(f[r], -static_cast<double>(r)) << "c=" << c << " r=" << r;
        }
    }
    EXPECT_EQ(dynbv::ga_state_value(1, 1.0), dynbv::ga_state_values(1.0, 1)[1]);
    EXPECT_THROW((void)dynbv::ga_state_value(0, 1.0), std::invalid_argument);
    EXPECT_THROW((void)dynbv::ga_state_value(51, 1.0), std::invalid_argument);
    EXPECT_THROW((void)dynbv::ga_state_values(0.0, 5), std::invalid_argument);
}

TEST(GaStateValue, MatchesNaiveSimulation) {
    for (double c : {1.0, 2.0}) {
        for (std::size_t r : {1U, 2U}) {
            const auto mc = oracle::state_value_mc(r, c, 0.5, 3000, 1, 6000, 1000 * r + static_cast<std::uint64_t>(c));
            EXPECT_NEAR(dynbv::ga_state_value(r, c), mc.mean, 3 * mc.std_err) << "c=" << c << " r=" << r;
        }
    }
}

TEST(FirstStepEvents, ProbabilitiesConsistent) {
    for (double c : {0.5, 1.0, 3.0}) {
        const auto ev = dynbv::first_step_events(at(c, 3));
        EXPECT_NEAR(ev.none_zero_flipped, std::pow(1 - c / 3000.0, 3), 1e-15);
        EXPECT_NEAR(ev.one_zero_only, 3 * c / 3000.0 * std::pow(1 - c / 3000.0, 2999), 1e-15);
        double sum = ev.none_zero_flipped + ev.one_zero_only;
        for (double p : ev.one_zero_r_ones) {
            sum += p;
        }
        EXPECT_LE(sum, 1.0 + 1e-12);
    }
}

TEST(AnalyticDrift, SmallCLimitIsOne) {
    EXPECT_NEAR(dynbv::ea_drift_near_optimum(at(1e-6)), 1.0, 1e-4);
    EXPECT_NEAR(dynbv::ga_drift_near_optimum(at(1e-6)), 1.0, 1e-4);
}

TEST(AnalyticDrift, SeriesTruncationStable) {
    for (double c : {1.0, 2.0, 3.0, 4.0}) {
        for (auto m : {DriftModel::EA, DriftModel::GA}) {
            const double base = dynbv::analytic_drift(m, {c, 3000, 1, 50, 0});
            EXPECT_NEAR(dynbv::analytic_drift(m, {c, 3000, 1, 60, 0}), base, 1e-9);
            const std::size_t s = dynbv::poisson_cutoff(c);
            EXPECT_NEAR(dynbv::analytic_drift(m, {c, 3000, 1, 50, s + 10}), base, 1e-9);
        }
    }
}

TEST(AnalyticDrift, PoissonCutoffTail) {
    for (double c : {0.5, 2.0, 5.0}) {
        const auto s = dynbv::poisson_cutoff(c);
        const auto p = dynbv::poisson_weights(c, s);
        double mass = 0.0;
        for (double v : p) {
            mass += v;
        }
        EXPECT_LT(1.0 - mass, 1e-12);
    }
}

TEST(AnalyticDrift, GaNearZeroAtThreePointOne) {
    EXPECT_LT(std::abs(dynbv::ga_drift_near_optimum(at(3.1))), 0.02);
}

TEST(Threshold, EaAndGaBrackets) {
    const auto ea = dynbv::drift_sign_threshold(DriftModel::EA, 3000, 1, 1.5, 4.0, 0.01);
    EXPECT_GE(ea.c_star, 2.4);
    EXPECT_LE(ea.c_star, 2.6);
    EXPECT_LE(ea.hi - ea.lo, 0.01);
    const auto ga = dynbv::drift_sign_threshold(DriftModel::GA, 3000, 1, 2.0, 5.0, 0.01);
    EXPECT_GE(ga.c_star, 3.0);
    EXPECT_LE(ga.c_star, 3.2);
}

TEST(Threshold, NoSignChangeReported) {
    EXPECT_THROW((void)dynbv::drift_sign_threshold(DriftModel::EA, 3000, 1, 0.5, 1.5, 0.01), std::domain_error);
    EXPECT_THROW((void)dynbv::drift_sign_threshold(DriftModel::EA, 3000, 1, 2.0, 1.0, 0.01), std::invalid_argument);
}

TEST(AnalyticCsv, Header) {
    std::ostringstream out;
    dynbv::write_analytic_csv(out, DriftModel::GA, 3000, 50, std::vector<dynbv::AnalyticRow>{{2.0, 1, 0.25}});
    EXPECT_EQ(out.str(), "algorithm,c,n,y,drift,r_max\nGA,2,3000,1,0.25,50\n");
}

TEST(McDrift, GaNegativeAtThreePointThree) {
    const AlgorithmConfig cfg{2, 3.3, Variant::GA, 0.5};
    Rng rng(7);
    const auto est = dynbv::mc_drift(cfg, EnvironmentSpec{}, 3000, 1, 4000, dynbv::kDefaultDriftSampleCap, rng);
    EXPECT_LT(est.mean, 0.0);
    EXPECT_EQ(est.timeouts, 0U);
}
