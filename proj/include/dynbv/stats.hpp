#pragma once

/// @file stats.hpp
/// @brief Wilcoxon-Mann-Whitney rank-sum test and the largest-significant-factor search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynbv {

/// Observed runtimes; `censored[i]` marks a run stopped at the cap.
struct RuntimeSample {
    std::vector<double> values;
    std::vector<bool> censored;

    static RuntimeSample uncensored(std::vector<double> v) {
        RuntimeSample s;
        s.censored.assign(v.size(), false);
        s.values = std::move(v);
        return s;
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }

    [[nodiscard]] RuntimeSample scaled(double factor) const {
        RuntimeSample s = *this;
        for (auto& v : s.values) {
            v *= factor;
        }
        return s;
    }
};

enum class Alternative { Less, Greater, TwoSided };

[[nodiscard]] inline std::string to_string(Alternative a) {
    switch (a) {
    case Alternative::Less:
        return "a_less";
    case Alternative::Greater:
        return "a_greater";
    case Alternative::TwoSided:
        return "two_sided";
    }
    return "unknown";
}

enum class PValueMethod { Auto, Exact, Normal };

/// Censored values either enter at their cap (conservative) or are dropped.
enum class CensoredMode { AtCap, Exclude };

inline constexpr std::size_t kExactLimit = 10;

struct RankSumResult {
    double u = 0.0; // U statistic of the first sample, midranks for ties
    double p = 1.0;
    bool exact = false;
};

namespace detail {

/// Doubled midranks (integers) of the pooled sample, first `m` belong to a.
inline std::vector<std::int64_t> doubled_midranks(const std::vector<double>& pooled) {
    const std::size_t total = pooled.size();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<std::int64_t> ranks(total);
    std::size_t i = 0;
    while (i < total) {
        std::size_t j = i;
        while (j + 1 < total && pooled[order[j + 1]] == pooled[order[i]]) {
            ++j;
        }
        // ranks i+1..j+1 share the midrank (i+j+2)/2; doubled: i+j+2.
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = static_cast<std::int64_t>(i + j + 2);
        }
        i = j + 1;
    }
    return ranks;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace detail

/// Exact permutation distribution of the rank sum, counted by dynamic
/// programming over doubled midranks (handles ties). Returns
/// (count with sum <= obs, count with sum >= obs, total subsets).
struct ExactTail {
    std::uint64_t at_most = 0;
    std::uint64_t at_least = 0;
    std::uint64_t total = 0;
};

[[nodiscard]] inline ExactTail exact_rank_sum_tails(const std::vector<std::int64_t>& ranks, std::size_t m,
                                                    std::int64_t observed) {
    const std::int64_t max_sum = std::accumulate(ranks.begin(), ranks.end(), std::int64_t{0});
    // ways[k][s]: subsets of size k with doubled rank sum s.
    std::vector<std::vector<std::uint64_t>> ways(m + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
    ways[0][0] = 1;
    for (std::int64_t r : ranks) {
        for (std::size_t k = m; k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (std::int64_t s = max_sum; s >= r; --s) {
                dst[s] += src[s - r];
            }
        }
    }
    ExactTail t;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
        const std::uint64_t w = ways[m][s];
        t.total += w;
        if (s <= observed) {
            t.at_most += w;
        }
        if (s >= observed) {
            t.at_least += w;
        }
    }
    return t;
}

/// Wilcoxon-Mann-Whitney test of a against b.
///
/// `Less` tests whether values of a tend to be smaller. U uses midranks.
/// Auto picks exact enumeration when both sizes are at most 10 and otherwise
/// the normal approximation with tie-corrected variance and continuity
/// correction.
[[nodiscard]] inline RankSumResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                                  Alternative alt, PValueMethod method = PValueMethod::Auto) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("mann_whitney_u: both samples must be nonempty");
    }
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<std::int64_t> ranks = detail::doubled_midranks(pooled);
    std::int64_t doubled_sum = 0;
    for (std::size_t i = 0; i < m; ++i) {
        doubled_sum += ranks[i];
    }
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    RankSumResult res;
    res.u = static_cast<double>(doubled_sum) / 2.0 - md * (md + 1) / 2.0;

    const bool exact = method == PValueMethod::Exact ||
                       (method == PValueMethod::Auto && m <= kExactLimit && n <= kExactLimit);
    if (exact) {
        res.exact = true;
        const ExactTail t = exact_rank_sum_tails(ranks, m, doubled_sum);
        const double total = static_cast<double>(t.total);
        const double lower = static_cast<double>(t.at_most) / total;
        const double upper = static_cast<double>(t.at_least) / total;
        switch (alt) {
        case Alternative::Less:
            res.p = lower;
            break;
        case Alternative::Greater:
            res.p = upper;
            break;
        case Alternative::TwoSided:
            res.p = std::min(1.0, 2.0 * std::min(lower, upper));
            break;
        }
        return res;
    }

    // Tie correction: sum over tie groups of t^3 - t.
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        const auto t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double total = md + nd;
    const double var = md * nd / 12.0 * ((total + 1) - ties / (total * (total - 1)));
    const double centered = res.u - md * nd / 2.0;
    if (!(var > 0.0)) {
        res.p = 1.0;
        return res;
    }
    const double sd = std::sqrt(var);
    switch (alt) {
    case Alternative::Less:
        res.p = detail::normal_cdf((centered + 0.5) / sd);
        break;
    case Alternative::Greater:
        res.p = 1.0 - detail::normal_cdf((centered - 0.5) / sd);
        break;
    case Alternative::TwoSided: {
        const double z = (std::abs(centered) - 0.5) / sd;
        res.p = std::min(1.0, 2.0 * (1.0 - detail::normal_cdf(z)));
        break;
    }
    }
    return res;
}

[[nodiscard]] inline std::vector<double> prepared_values(const RuntimeSample& s, CensoredMode mode) {
    if (s.censored.size() != s.values.size()) {
        throw std::invalid_argument("RuntimeSample: censored flags and values differ in length");
    }
    if (mode == CensoredMode::AtCap) {
        return s.values;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!s.censored[i]) {
            out.push_back(s.values[i]);
        }
    }
    return out;
}

[[nodiscard]] inline RankSumResult mann_whitney_u(const RuntimeSample& a, const RuntimeSample& b, Alternative alt,
                                                  CensoredMode mode = CensoredMode::AtCap,
                                                  PValueMethod method = PValueMethod::Auto) {
    return mann_whitney_u(prepared_values(a, mode), prepared_values(b, mode), alt, method);
}

struct FactorResult {
    bool significant = false; // false: not significant even at d = 1
    double d_max = 1.0;       // largest d found with p <= alpha
    double d_upper = 1.0;     // smallest d found with p > alpha (bracket end)
    double alpha = 0.05;
    double p_at_d_max = 1.0;
};

/// Largest d >= 1 such that d * fast is still significantly smaller than slow
/// (one-sided rank-sum test at level alpha). p is a step function of d, so
/// the answer is bracketed by bisection to within `tolerance`.
[[nodiscard]] inline FactorResult max_significant_factor(const RuntimeSample& fast, const RuntimeSample& slow,
                                                         double alpha = 0.05, double tolerance = 1e-3,
                                                         CensoredMode mode = CensoredMode::AtCap) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(tolerance > 0.0)) {
        throw std::invalid_argument("max_significant_factor: need alpha in (0,1) and tolerance > 0");
    }
    const std::vector<double> f = prepared_values(fast, mode);
    const std::vector<double> s = prepared_values(slow, mode);
    auto p_at = [&](double d) {
        std::vector<double> scaled(f);
        for (auto& v : scaled) {
            v *= d;
        }
        return mann_whitney_u(scaled, s, Alternative::Less).p;
    };
    FactorResult res;
    res.alpha = alpha;
    const double p1 = p_at(1.0);
    if (p1 > alpha) {
        res.p_at_d_max = p1;
        return res;
    }
    res.significant = true;
    double lo = 1.0;
    double p_lo = p1;
    double hi = 2.0;
    // Once d * min(fast) exceeds max(slow) no ordering pair favours fast any more.
    const double f_min = *std::min_element(f.begin(), f.end());
    const double s_max = *std::max_element(s.begin(), s.end());
    const double ceiling = f_min > 0.0 ? 2.0 * s_max / f_min + 2.0 : std::numeric_limits<double>::infinity();
    while (true) {
        const double p = p_at(hi);
        if (p > alpha) {
            break;
        }
        lo = hi;
        p_lo = p;
        hi *= 2.0;
        if (hi > ceiling) {
            // Significant however far fast is scaled (e.g. zeros in fast).
            res.d_max = res.d_upper = std::numeric_limits<double>::infinity();
            res.p_at_d_max = p;
            return res;
        }
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double p = p_at(mid);
        if (p <= alpha) {
            lo = mid;
            p_lo = p;
        } else {
            hi = mid;
        }
    }
    res.d_max = lo;
    res.d_upper = hi;
    res.p_at_d_max = p_lo;
    return res;
}

} // namespace dynbv
