#pragma once

/// @file environment.hpp
/// @brief Dynamic objectives: Dynamic BinVal, dynamic linear functions, and OneMax.
///
/// A `Round` is the objective instance of one generation. Rounds only ever
/// compare strings against each other; fitness values themselves are never
/// materialized for DynBV since 2^n overflows every fixed-width type.
///
/// DynBV priorities are counter-based: the rank key of position i in a round
/// with seed k is mix64(k + (i+1) * golden). mix64 is a bijection, so keys
/// within a round are distinct and the induced order on any subset of
/// positions is a uniformly random ranking of that subset. Nothing of size n
/// is drawn per generation.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynbv/bitstring.hpp"
#include "dynbv/random.hpp"

namespace dynbv {

enum class EnvironmentKind { DynBV, DynamicLinear, OneMax };

[[nodiscard]] inline std::string to_string(EnvironmentKind kind) {
    switch (kind) {
    case EnvironmentKind::DynBV:
        return "DynBV";
    case EnvironmentKind::DynamicLinear:
        return "DynamicLinear";
    case EnvironmentKind::OneMax:
        return "OneMax";
    }
    return "unknown";
}

[[nodiscard]] inline EnvironmentKind parse_environment_kind(const std::string& name) {
    if (name == "DynBV") {
        return EnvironmentKind::DynBV;
    }
    if (name == "DynamicLinear") {
        return EnvironmentKind::DynamicLinear;
    }
    if (name == "OneMax") {
        return EnvironmentKind::OneMax;
    }
    throw std::invalid_argument("unknown environment kind '" + name + "'");
}

/// Weight law of a dynamic linear function.
struct WeightDistribution {
    enum class Kind { Pareto, Constant };

    Kind kind = Kind::Pareto;
    double shape = 1.0;           // Pareto shape beta, scale 1
    std::vector<double> weights;  // Constant: one positive weight per position

    static WeightDistribution pareto(double beta) { return {Kind::Pareto, beta, {}}; }
    static WeightDistribution constant(std::vector<double> w) { return {Kind::Constant, 0.0, std::move(w)}; }

    friend bool operator==(const WeightDistribution&, const WeightDistribution&) = default;
};

/// Pareto(beta) with scale 1 by inverse CDF: U^(-1/beta).
[[nodiscard]] inline double sample_pareto(double beta, Rng& rng) {
    return std::pow(rng.uniform01(), -1.0 / beta);
}

struct EnvironmentSpec {
    EnvironmentKind kind = EnvironmentKind::DynBV;
    WeightDistribution weights = WeightDistribution::pareto(1.0);
    std::uint64_t change_period = 1;

    void validate(std::size_t n) const {
        if (change_period < 1) {
            throw std::invalid_argument("environment: change period must be at least 1");
        }
        if (kind != EnvironmentKind::DynamicLinear) {
            return;
        }
        if (weights.kind == WeightDistribution::Kind::Pareto) {
            if (!(weights.shape > 0.0)) {
                throw std::invalid_argument("environment: Pareto shape must be positive");
            }
        } else {
            if (weights.weights.size() != n) {
                throw std::invalid_argument("environment: constant weight vector must have length n");
            }
            for (double w : weights.weights) {
                if (!(w > 0.0)) {
                    throw std::invalid_argument("environment: weights must be strictly positive");
                }
            }
        }
    }

    [[nodiscard]] std::string label() const { return to_string(kind); }

    friend bool operator==(const EnvironmentSpec&, const EnvironmentSpec&) = default;
};

/// Objective instance for one generation (or one change period).
class Round {
public:
    Round() = default;

    static Round dynbv(std::uint64_t seed) {
        Round r;
        r.kind_ = EnvironmentKind::DynBV;
        r.seed_ = seed;
        return r;
    }

    /// DynBV round with an explicit rank per position (higher rank = more
    /// significant bit). Ranks must be distinct.
    static Round dynbv_with_ranks(std::vector<std::uint64_t> ranks) {
        std::vector<std::uint64_t> sorted = ranks;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw std::invalid_argument("Round: priority ranks must be distinct");
        }
        Round r;
        r.kind_ = EnvironmentKind::DynBV;
        r.ranks_ = std::move(ranks);
        return r;
    }

    static Round linear(std::vector<double> weights) {
        for (double w : weights) {
            if (!(w > 0.0)) {
                throw std::invalid_argument("Round: linear weights must be strictly positive");
            }
        }
        Round r;
        r.kind_ = EnvironmentKind::DynamicLinear;
        r.weights_ = std::move(weights);
        return r;
    }

    static Round onemax() {
        Round r;
        r.kind_ = EnvironmentKind::OneMax;
        return r;
    }

    [[nodiscard]] EnvironmentKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

    /// Rank key of a position; larger means more significant.
    [[nodiscard]] std::uint64_t priority(std::size_t pos) const noexcept {
        if (!ranks_.empty()) {
            return ranks_[pos];
        }
        return mix64(seed_ + (static_cast<std::uint64_t>(pos) + 1) * kGolden);
    }

    /// Length the round is bound to, or 0 if it accepts any length.
    [[nodiscard]] std::size_t bound_length() const noexcept {
        if (!ranks_.empty()) {
            return ranks_.size();
        }
        return weights_.size();
    }

private:
    EnvironmentKind kind_ = EnvironmentKind::OneMax;
    std::uint64_t seed_ = 0;
    std::vector<std::uint64_t> ranks_;
    std::vector<double> weights_;
};

/// Draws a fresh round for strings of length n.
[[nodiscard]] inline Round sample_round(const EnvironmentSpec& spec, std::size_t n, Rng& rng) {
    switch (spec.kind) {
    case EnvironmentKind::DynBV:
        return Round::dynbv(rng());
    case EnvironmentKind::DynamicLinear: {
        if (spec.weights.kind == WeightDistribution::Kind::Constant) {
            return Round::linear(spec.weights.weights);
        }
        std::vector<double> w(n);
        for (auto& v : w) {
            v = sample_pareto(spec.weights.shape, rng);
        }
        return Round::linear(std::move(w));
    }
    case EnvironmentKind::OneMax:
        return Round::onemax();
    }
    throw std::logic_error("sample_round: unhandled environment kind");
}

/// Serves the round of each generation, redrawing once every change period.
class RoundSchedule {
public:
    RoundSchedule(EnvironmentSpec spec, std::size_t n) : spec_(std::move(spec)), n_(n) { spec_.validate(n); }

    /// Round for generation g >= 1. A fresh round is drawn iff (g-1) mod s == 0.
    const Round& at(std::uint64_t generation, Rng& rng) {
        if (generation < 1) {
            throw std::invalid_argument("RoundSchedule: generations are numbered from 1");
        }
        if (!has_round_ || (generation - 1) % spec_.change_period == 0) {
            current_ = sample_round(spec_, n_, rng);
            has_round_ = true;
            ++draws_;
        }
        return current_;
    }

    [[nodiscard]] std::uint64_t draws() const noexcept { return draws_; }
    [[nodiscard]] const EnvironmentSpec& spec() const noexcept { return spec_; }

private:
    EnvironmentSpec spec_;
    std::size_t n_;
    Round current_;
    bool has_round_ = false;
    std::uint64_t draws_ = 0;
};

namespace detail {

inline void check_round_length(const Round& round, std::size_t n) {
    const std::size_t bound = round.bound_length();
    if (bound != 0 && bound != n) {
        throw std::invalid_argument("round and string lengths differ");
    }
}

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

template <typename Fn>
void for_each_set_bit(std::span<const std::uint64_t> words, Fn&& fn) {
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits != 0) {
            const auto b = static_cast<std::size_t>(std::countr_zero(bits));
            fn(w * 64 + b);
            bits &= bits - 1;
        }
    }
}

} // namespace detail

/// Orders a against b under the round. `equal` only for identical strings
/// (DynBV) or exact sum ties (linear, OneMax).
[[nodiscard]] inline std::weak_ordering compare(const Round& round, const Bitstring& a, const Bitstring& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("compare: length mismatch");
    }
    detail::check_round_length(round, a.size());
    const auto wa = a.words();
    const auto wb = b.words();
    switch (round.kind()) {
    case EnvironmentKind::DynBV: {
        bool found = false;
        std::uint64_t best = 0;
        bool a_wins = false;
        for (std::size_t w = 0; w < wa.size(); ++w) {
            std::uint64_t diff = wa[w] ^ wb[w];
            while (diff != 0) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(diff));
                const std::size_t pos = w * 64 + bit;
                const std::uint64_t key = round.priority(pos);
                if (!found || key > best) {
                    found = true;
                    best = key;
                    a_wins = ((wa[w] >> bit) & 1U) != 0;
                }
                diff &= diff - 1;
            }
        }
        if (!found) {
            return std::weak_ordering::equivalent;
        }
        return a_wins ? std::weak_ordering::greater : std::weak_ordering::less;
    }
    case EnvironmentKind::DynamicLinear: {
        // Shared positions contribute equally; sum only where the strings differ.
        detail::CompensatedSum delta;
        const auto weights = round.weights();
        for (std::size_t w = 0; w < wa.size(); ++w) {
            std::uint64_t diff = wa[w] ^ wb[w];
            while (diff != 0) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(diff));
                const double weight = weights[w * 64 + bit];
                delta.add(((wa[w] >> bit) & 1U) != 0 ? weight : -weight);
                diff &= diff - 1;
            }
        }
        const double d = delta.value();
        if (d > 0.0) {
            return std::weak_ordering::greater;
        }
        if (d < 0.0) {
            return std::weak_ordering::less;
        }
        return std::weak_ordering::equivalent;
    }
    case EnvironmentKind::OneMax:
        return a.ones() <=> b.ones();
    }
    throw std::logic_error("compare: unhandled round kind");
}

/// Index of a candidate with minimal fitness under the round; ties broken
/// uniformly at random. No random draw is made when the minimum is unique.
///
/// For DynBV only the positions where the candidates are not all equal are
/// ranked, so the cost is O(|D| log |D| + mu |D|) after an O(mu n / 64) scan.
class WorstSelector {
public:
    std::size_t operator()(const Round& round, std::span<const Bitstring* const> candidates, Rng& rng) {
        if (candidates.empty()) {
            throw std::invalid_argument("select_worst: no candidates");
        }
        const std::size_t n = candidates.front()->size();
        for (const Bitstring* c : candidates) {
            if (c->size() != n) {
                throw std::invalid_argument("select_worst: candidate lengths differ");
            }
        }
        detail::check_round_length(round, n);
        alive_.clear();
        switch (round.kind()) {
        case EnvironmentKind::DynBV:
            min_dynbv(round, candidates);
            break;
        case EnvironmentKind::DynamicLinear:
            min_linear(round, candidates);
            break;
        case EnvironmentKind::OneMax:
            min_onemax(candidates);
            break;
        }
        if (alive_.size() == 1) {
            return alive_.front();
        }
        return alive_[rng.below(alive_.size())];
    }

private:
    void disagreement(std::span<const Bitstring* const> candidates) {
        const auto first = candidates.front()->words();
        mask_.assign(first.size(), 0);
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            const auto wi = candidates[i]->words();
            for (std::size_t w = 0; w < first.size(); ++w) {
                mask_[w] |= first[w] ^ wi[w];
            }
        }
    }

    void min_dynbv(const Round& round, std::span<const Bitstring* const> candidates) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            alive_.push_back(i);
        }
        disagreement(candidates);
        ranked_.clear();
        detail::for_each_set_bit(mask_, [&](std::size_t pos) { ranked_.emplace_back(round.priority(pos), pos); });
        std::sort(ranked_.begin(), ranked_.end(), std::greater<>{});
        // Scan positions from most to least significant, dropping candidates
        // holding a one where some surviving candidate holds a zero.
        for (const auto& [key, pos] : ranked_) {
            if (alive_.size() == 1) {
                break;
            }
            bool any_zero = false;
            for (std::size_t idx : alive_) {
                if (!candidates[idx]->test(pos)) {
                    any_zero = true;
                    break;
                }
            }
            if (!any_zero) {
                continue;
            }
            std::erase_if(alive_, [&](std::size_t idx) { return candidates[idx]->test(pos); });
        }
    }

    void min_linear(const Round& round, std::span<const Bitstring* const> candidates) {
        disagreement(candidates);
        const auto weights = round.weights();
        sums_.assign(candidates.size(), 0.0);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            detail::CompensatedSum s;
            const auto words = candidates[i]->words();
            for (std::size_t w = 0; w < words.size(); ++w) {
                std::uint64_t bits = words[w] & mask_[w];
                while (bits != 0) {
                    s.add(weights[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))]);
                    bits &= bits - 1;
                }
            }
            sums_[i] = s.value();
        }
        const double lo = *std::min_element(sums_.begin(), sums_.end());
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (sums_[i] == lo) {
                alive_.push_back(i);
            }
        }
    }

    void min_onemax(std::span<const Bitstring* const> candidates) {
        std::size_t lo = candidates.front()->ones();
        for (const Bitstring* c : candidates) {
            lo = std::min(lo, c->ones());
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (candidates[i]->ones() == lo) {
                alive_.push_back(i);
            }
        }
    }

    std::vector<std::size_t> alive_;
    std::vector<std::uint64_t> mask_;
    std::vector<std::pair<std::uint64_t, std::size_t>> ranked_;
    std::vector<double> sums_;
};

[[nodiscard]] inline std::size_t select_worst(const Round& round, std::span<const Bitstring* const> candidates,
                                              Rng& rng) {
    WorstSelector selector;
    return selector(round, candidates, rng);
}

[[nodiscard]] inline std::size_t select_worst(const Round& round, std::span<const Bitstring> candidates, Rng& rng) {
    std::vector<const Bitstring*> ptrs;
    ptrs.reserve(candidates.size());
    for (const auto& c : candidates) {
        ptrs.push_back(&c);
    }
    return select_worst(round, std::span<const Bitstring* const>(ptrs), rng);
}

struct ProbabilityEstimate {
    double value = 0.0;
    double std_err = 0.0;
    std::uint64_t trials = 0;
};

/// Monte-Carlo estimate of p_k: the probability that the largest of k i.i.d.
/// Pareto(beta) weights exceeds the sum of the other k-1.
[[nodiscard]] inline ProbabilityEstimate estimate_dominance_pk(std::size_t k, double beta, std::uint64_t trials,
                                                               Rng& rng) {
    if (k < 2) {
        throw std::invalid_argument("estimate_dominance_pk: k must be at least 2");
    }
    if (!(beta > 0.0)) {
        throw std::invalid_argument("estimate_dominance_pk: beta must be positive");
    }
    if (trials < 1) {
        throw std::invalid_argument("estimate_dominance_pk: need at least one trial");
    }
    std::uint64_t hits = 0;
    std::vector<double> w(k);
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (auto& v : w) {
            v = sample_pareto(beta, rng);
        }
        const auto top = std::max_element(w.begin(), w.end());
        detail::CompensatedSum rest;
        for (auto it = w.begin(); it != w.end(); ++it) {
            if (it != top) {
                rest.add(*it);
            }
        }
        if (*top > rest.value()) {
            ++hits;
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

} // namespace dynbv
