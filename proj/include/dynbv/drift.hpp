#pragma once

/// @file drift.hpp
/// @brief Degenerate-population drift E[X_i - X_{i+1} | X_i = y].
///
/// X_i is the zero-bit count of the i-th degenerate population (all members
/// identical). Two routes are provided:
///
///  * Monte-Carlo: start from mu copies of a random string with y zero-bits,
///    run until an offspring that is not a copy has been accepted and the
///    population is degenerate again, and record the change in zero-bits.
///  * Analytic, for the (2+1)-EA and (2+1)-GA near the optimum (y = o(n)):
///    Markov-chain state values F(r) and Fbar(r) combined with the first-step
///    event probabilities. Lower-order (1 +- o(1)) factors are taken as 1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbv/bitstring.hpp"
#include "dynbv/csv.hpp"
#include "dynbv/environment.hpp"
#include "dynbv/evolve.hpp"
#include "dynbv/harness.hpp"
#include "dynbv/random.hpp"

namespace dynbv {

inline constexpr std::uint64_t kDefaultDriftSampleCap = 1'000'000;

struct DriftEstimate {
    std::size_t y = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double std_err = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t timeouts = 0;
};

/// Draws degenerate-population drift samples for one configuration.
///
/// Reuses its stepping machinery across samples.
class DriftSampler {
public:
    DriftSampler(const AlgorithmConfig& config, EnvironmentSpec spec, std::size_t n)
        : stepper_(config, n), spec_(std::move(spec)), n_(n) {
        spec_.validate(n);
    }

    /// One sample: y minus the zero-bits of the next degenerate population, or
    /// nullopt if `cap` generations pass first.
    std::optional<std::int64_t> sample(std::size_t y, std::uint64_t cap, Rng& rng) {
        if (y < 1 || y > n_) {
            throw std::invalid_argument("mc_drift_sample: y must lie in [1, n]");
        }
        const std::size_t mu = stepper_.config().mu;
        Population pop;
        pop.members.assign(mu, with_zero_count(n_, y, rng));
        RoundSchedule schedule(spec_, n_);
        bool progressed = false;
        while (pop.generation < cap) {
            const Round& round = schedule.at(pop.generation + 1, rng);
            const StepEvent ev = stepper_.step(pop, round, rng);
            // Until the first progress event every accepted offspring is a copy
            // of the start string, so "accepted and not a copy" is exactly
            // "accepted and different from the start string".
            if (!progressed) {
                progressed = ev.accepted && !ev.offspring_is_copy;
            }
            if (progressed && is_degenerate(pop)) {
                return static_cast<std::int64_t>(y) - static_cast<std::int64_t>(pop.members.front().zeros());
            }
        }
        return std::nullopt;
    }

private:
    Stepper stepper_;
    EnvironmentSpec spec_;
    std::size_t n_;
};

[[nodiscard]] inline std::optional<std::int64_t> mc_drift_sample(const AlgorithmConfig& config,
                                                                 const EnvironmentSpec& spec, std::size_t n,
                                                                 std::size_t y, std::uint64_t per_sample_cap,
                                                                 Rng& rng) {
    DriftSampler sampler(config, spec, n);
    return sampler.sample(y, per_sample_cap, rng);
}

/// Aggregates `samples` drift samples. Sample i uses a stream derived from one
/// draw of `rng` and i, so the estimate does not depend on `workers`.
[[nodiscard]] inline DriftEstimate mc_drift(const AlgorithmConfig& config, const EnvironmentSpec& spec, std::size_t n,
                                            std::size_t y, std::uint64_t samples, std::uint64_t per_sample_cap,
                                            Rng& rng, std::size_t workers = 1) {
    if (samples < 1) {
        throw std::invalid_argument("mc_drift: need at least one sample");
    }
    if (y < 1 || y > n) {
        throw std::invalid_argument("mc_drift: y must lie in [1, n]");
    }
    const std::uint64_t base = rng();
    workers = std::max<std::size_t>(1, std::min<std::size_t>(workers, samples));
    std::vector<std::optional<std::int64_t>> deltas(samples);
    // One sampler per contiguous block keeps scratch reuse without sharing.
    const std::uint64_t block = (samples + workers - 1) / workers;
    parallel_for(workers, workers, [&](std::size_t w) {
        DriftSampler sampler(config, spec, n);
        const std::uint64_t lo = w * block;
        const std::uint64_t hi = std::min<std::uint64_t>(samples, lo + block);
        for (std::uint64_t i = lo; i < hi; ++i) {
            Rng local(derive_seed(base, {i}));
            deltas[i] = sampler.sample(y, per_sample_cap, local);
        }
    });
    DriftEstimate est;
    est.y = y;
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t k = 0;
    for (const auto& d : deltas) {
        if (!d) {
            ++est.timeouts;
            continue;
        }
        ++k;
        const double v = static_cast<double>(*d);
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    est.samples = k;
    if (k == 0) {
        est.mean = std::numeric_limits<double>::quiet_NaN();
        est.std_dev = est.std_err = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    est.mean = mean;
    est.std_dev = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1)) : 0.0;
    est.std_err = est.std_dev / std::sqrt(static_cast<double>(k));
    return est;
}

[[nodiscard]] inline std::vector<DriftEstimate> drift_profile(const AlgorithmConfig& config,
                                                              const EnvironmentSpec& spec, std::size_t n,
                                                              std::span<const std::size_t> y_grid,
                                                              std::uint64_t samples, std::uint64_t per_sample_cap,
                                                              Rng& rng, std::size_t workers = 1) {
    if (y_grid.empty()) {
        throw std::invalid_argument("drift_profile: empty y grid");
    }
    std::vector<DriftEstimate> out;
    out.reserve(y_grid.size());
    for (std::size_t y : y_grid) {
        out.push_back(mc_drift(config, spec, n, y, samples, per_sample_cap, rng, workers));
    }
    return out;
}

inline void write_drift_csv(std::ostream& out, const AlgorithmConfig& config, std::size_t n,
                            std::span<const DriftEstimate> rows, bool header = true) {
    if (header) {
        out << "algorithm,mu,c,n,y,mean,std_dev,std_err,samples,timeouts\n";
    }
    for (const auto& e : rows) {
        out << to_string(config.variant) << ',' << config.mu << ',' << csv::format_double(config.c) << ',' << n << ','
            << e.y << ',' << csv::format_double(e.mean) << ',' << csv::format_double(e.std_dev) << ','
            << csv::format_double(e.std_err) << ',' << e.samples << ',' << e.timeouts << '\n';
    }
}

// ---------------------------------------------------------------------------
// Analytic drift near the optimum
// ---------------------------------------------------------------------------

enum class DriftModel { EA, GA };

[[nodiscard]] inline std::string to_string(DriftModel m) {
    return m == DriftModel::EA ? "(2+1)-EA" : "(2+1)-GA";
}

inline constexpr std::size_t kDefaultRMax = 50;

struct AnalyticDriftParams {
    double c = 1.0;
    std::size_t n = 3000;
    std::size_t y = 1;
    std::size_t r_max = kDefaultRMax;
    std::size_t s_max = 0; // 0 selects the Poisson cutoff automatically

    void validate() const {
        if (!(c > 0.0)) {
            throw std::invalid_argument("analytic drift: c must be positive");
        }
        if (n < 2 || y < 1 || y >= n) {
            throw std::invalid_argument("analytic drift: need n >= 2 and 1 <= y < n");
        }
        if (r_max < 1) {
            throw std::invalid_argument("analytic drift: r_max must be at least 1");
        }
    }
};

/// Smallest S with P[Poisson(c) > S] < tail.
[[nodiscard]] inline std::size_t poisson_cutoff(double c, double tail = 1e-15) {
    double term = std::exp(-c);
    double cdf = term;
    std::size_t s = 0;
    while (1.0 - cdf >= tail && s < 10000) {
        ++s;
        term *= c / static_cast<double>(s);
        cdf += term;
        // Past the mode the remaining mass is below term * geometric factor.
        if (static_cast<double>(s) > c && term * (static_cast<double>(s) + 1) / (static_cast<double>(s) + 1 - c) < tail) {
            break;
        }
    }
    return s;
}

[[nodiscard]] inline std::vector<double> poisson_weights(double c, std::size_t s_max) {
    std::vector<double> p(s_max + 1);
    double term = std::exp(-c);
    for (std::size_t s = 0; s <= s_max; ++s) {
        if (s > 0) {
            term *= c / static_cast<double>(s);
        }
        p[s] = term;
    }
    return p;
}

/// Expected change X_i - X_{i+1} of the (2+1)-EA from the state {x, xbar},
/// where xbar gained x's zero-bit and lost r one-bits: (1-r)/(r+1).
[[nodiscard]] inline double ea_state_value(std::size_t r) {
    if (r < 1) {
        throw std::invalid_argument("ea_state_value: r must be at least 1");
    }
    const auto rr = static_cast<double>(r);
    return (1.0 - rr) / (rr + 1.0);
}

/// State values Fbar(1..r_max) of the (2+1)-GA (index 0 unused).
///
/// For each r the one-step balance equation
///
///   4 Fbar(r) = sum_s p_s [ (r+2s+1)/(r+s+1) Fbar(r) + (1-r)/(r+s+1) ]
///             + Fbar(r)/2 + (1-r)/(2(r+1))
///             + sum_{s=0}^{r-1} C(r,s) 2^-(r+1) (s+1-r)/(r+1)
///             + sum_{s=1}^{r-1} C(r,s) 2^-(r+1) r/(r+1) Fbar(r-s)
///             + 2^-(r+1) r/(r+1) Fbar(r) + 2^-(r+1)
///             + sum_{s=0}^{r} C(r,s) 2^-(r+1) Fbar(r)/(s+1)
///
/// (p_s the Poisson(c) weights) is linear in Fbar(r) once Fbar(1..r-1) are
/// known, and is solved in increasing r.
[[nodiscard]] inline std::vector<double> ga_state_values(double c, std::size_t r_max, std::size_t s_max = 0) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("ga_state_values: c must be positive");
    }
    if (r_max < 1) {
        throw std::invalid_argument("ga_state_values: r_max must be at least 1");
    }
    if (s_max == 0) {
        s_max = poisson_cutoff(c);
    }
    const std::vector<double> p = poisson_weights(c, s_max);
    std::vector<double> f(r_max + 1, 0.0);
    for (std::size_t r = 1; r <= r_max; ++r) {
        const auto rr = static_cast<double>(r);
        const double half_pow = std::ldexp(1.0, -static_cast<int>(r + 1)); // 2^-(r+1)
        double constant = 0.0;
        double coeff = 4.0; // coefficient of Fbar(r) after moving it to the left
        for (std::size_t s = 0; s <= s_max; ++s) {
            const auto ss = static_cast<double>(s);
            coeff -= p[s] * (rr + 2 * ss + 1) / (rr + ss + 1);
            constant += p[s] * (1 - rr) / (rr + ss + 1);
        }
        coeff -= 0.5;
        constant += (1 - rr) / (2 * (rr + 1));
        coeff -= half_pow * rr / (rr + 1);
        constant += half_pow;
        // Binomial coefficients C(r, s) built incrementally in floating point.
        double binom = 1.0;
        for (std::size_t s = 0; s <= r; ++s) {
            const auto ss = static_cast<double>(s);
            const double w = binom * half_pow;
            if (s < r) {
                constant += w * (ss + 1 - rr) / (rr + 1);
            }
            if (s >= 1 && s < r) {
                constant += w * rr / (rr + 1) * f[r - s];
            }
            coeff -= w / (ss + 1);
            binom = binom * (rr - ss) / (ss + 1);
        }
        if (!(coeff > 0.0)) {
            throw std::domain_error("ga_state_values: balance equation has non-positive coefficient at r=" +
                                    std::to_string(r));
        }
        f[r] = constant / coeff;
    }
    return f;
}

[[nodiscard]] inline double ga_state_value(std::size_t r, double c, std::size_t r_max = kDefaultRMax,
                                           std::size_t s_max = 0) {
    if (r < 1 || r > r_max) {
        throw std::invalid_argument("ga_state_value: r must lie in [1, r_max]");
    }
    return ga_state_values(c, r_max, s_max)[r];
}

/// First-step event probabilities from a degenerate population with y zero-bits.
struct FirstStepEvents {
    double none_zero_flipped = 0.0;       // (1-c/n)^y
    double one_zero_only = 0.0;           // exactly one zero-bit, no one-bits
    std::vector<double> one_zero_r_ones;  // index r: one zero-bit and exactly r one-bits (r>=1)
    double rejected_single_zero = 0.0;    // sum_r P[r] * r/(r+1)
};

[[nodiscard]] inline FirstStepEvents first_step_events(const AnalyticDriftParams& prm) {
    prm.validate();
    const double n = static_cast<double>(prm.n);
    const double y = static_cast<double>(prm.y);
    const double q = prm.c / n;
    const double log_keep = std::log1p(-q);
    FirstStepEvents ev;
    ev.none_zero_flipped = std::exp(y * log_keep);
    ev.one_zero_only = y * q * std::exp((n - 1) * log_keep);
    ev.one_zero_r_ones.assign(prm.r_max + 1, 0.0);
    const double ones = n - y;
    for (std::size_t r = 1; r <= prm.r_max; ++r) {
        const auto rr = static_cast<double>(r);
        if (rr > ones) {
            break;
        }
        const double log_choose = std::lgamma(ones + 1) - std::lgamma(rr + 1) - std::lgamma(ones - rr + 1);
        ev.one_zero_r_ones[r] = y * std::exp(log_choose + (rr + 1) * std::log(q) + (n - rr - 1) * log_keep);
        ev.rejected_single_zero += ev.one_zero_r_ones[r] * rr / (rr + 1);
    }
    return ev;
}

namespace detail {

inline double progress_numerator(const FirstStepEvents& ev, std::span<const double> state_value) {
    double num = ev.one_zero_only;
    for (std::size_t r = 1; r < ev.one_zero_r_ones.size(); ++r) {
        num += ev.one_zero_r_ones[r] / (static_cast<double>(r) + 1) * state_value[r];
    }
    return num;
}

} // namespace detail

/// (2+1)-EA drift at y = o(n).
///
/// P[progress] = 1 - (1-c/n)^y - P[one zero-bit, r>=1 one-bits, rejected]:
/// offspring that flip no zero-bit are dominated or copies and never count as
/// progress, and the rejected single-zero flips are removed as well.
[[nodiscard]] inline double ea_drift_near_optimum(const AnalyticDriftParams& prm) {
    const FirstStepEvents ev = first_step_events(prm);
    std::vector<double> f(prm.r_max + 1, 0.0);
    for (std::size_t r = 1; r <= prm.r_max; ++r) {
        f[r] = ea_state_value(r);
    }
    const double progress = -std::expm1(static_cast<double>(prm.y) * std::log1p(-prm.c / static_cast<double>(prm.n))) -
                            ev.rejected_single_zero;
    return detail::progress_numerator(ev, f) / progress;
}

/// (2+1)-GA drift at y = o(n). Mutation happens in half the generations, so
/// P[progress] = 1/2 - 1/2 (P[no zero-bit flipped] + P[rejected single-zero])
/// and the numerator carries the same 1/2, written as a 2 in the denominator.
[[nodiscard]] inline double ga_drift_near_optimum(const AnalyticDriftParams& prm) {
    const FirstStepEvents ev = first_step_events(prm);
    const std::vector<double> f = ga_state_values(prm.c, prm.r_max, prm.s_max);
    const double flipped_some = -std::expm1(static_cast<double>(prm.y) * std::log1p(-prm.c / static_cast<double>(prm.n)));
    const double progress = 0.5 * (flipped_some - ev.rejected_single_zero);
    return detail::progress_numerator(ev, f) / (2.0 * progress);
}

[[nodiscard]] inline double analytic_drift(DriftModel model, const AnalyticDriftParams& prm) {
    return model == DriftModel::EA ? ea_drift_near_optimum(prm) : ga_drift_near_optimum(prm);
}

struct ThresholdResult {
    double c_star = 0.0;
    double lo = 0.0; // drift > 0 here
    double hi = 0.0; // drift < 0 here
    std::size_t iterations = 0;
};

/// Bisection root in c of the analytic drift. Requires drift(c_lo) > 0 > drift(c_hi).
[[nodiscard]] inline ThresholdResult drift_sign_threshold(DriftModel model, std::size_t n, std::size_t y, double c_lo,
                                                          double c_hi, double tolerance,
                                                          std::size_t r_max = kDefaultRMax) {
    if (!(tolerance > 0.0) || !(c_lo > 0.0) || !(c_hi > c_lo)) {
        throw std::invalid_argument("drift_sign_threshold: need 0 < c_lo < c_hi and tolerance > 0");
    }
    auto drift_at = [&](double c) { return analytic_drift(model, AnalyticDriftParams{c, n, y, r_max, 0}); };
    const double d_lo = drift_at(c_lo);
    const double d_hi = drift_at(c_hi);
    if (!(d_lo > 0.0 && d_hi < 0.0)) {
        throw std::domain_error("drift_sign_threshold: no sign change on [" + csv::format_double(c_lo) + ", " +
                                csv::format_double(c_hi) + "] (drift " + csv::format_double(d_lo) + ", " +
                                csv::format_double(d_hi) + ")");
    }
    ThresholdResult res{0.0, c_lo, c_hi, 0};
    while (res.hi - res.lo > tolerance) {
        const double mid = 0.5 * (res.lo + res.hi);
        if (drift_at(mid) > 0.0) {
            res.lo = mid;
        } else {
            res.hi = mid;
        }
        ++res.iterations;
    }
    res.c_star = 0.5 * (res.lo + res.hi);
    return res;
}

struct AnalyticRow {
    double c = 0.0;
    std::size_t y = 0;
    double drift = 0.0;
};

inline void write_analytic_csv(std::ostream& out, DriftModel model, std::size_t n, std::size_t r_max,
                               std::span<const AnalyticRow> rows) {
    out << "algorithm,c,n,y,drift,r_max\n";
    const std::string alg = model == DriftModel::EA ? "EA" : "GA";
    for (const auto& row : rows) {
        out << alg << ',' << csv::format_double(row.c) << ',' << n << ',' << row.y << ','
            << csv::format_double(row.drift) << ',' << r_max << '\n';
    }
}

} // namespace dynbv
