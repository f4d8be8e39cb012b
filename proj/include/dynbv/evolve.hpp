#pragma once

/// @file evolve.hpp
/// @brief The (mu+1)-EA, (mu+1)-GA and (mu+1)-GA-NoCopy as one generation step.
///
/// Each generation creates one offspring (mutation of a uniform member, or for
/// the GA variants uniform crossover of two members with the configured
/// probability) and removes a worst element of the mu+1 candidates under the
/// generation's round, breaking ties uniformly.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynbv/bitstring.hpp"
#include "dynbv/environment.hpp"
#include "dynbv/random.hpp"

namespace dynbv {

enum class Variant { EA, GA, GANoCopy };

[[nodiscard]] inline std::string to_string(Variant v) {
    switch (v) {
    case Variant::EA:
        return "EA";
    case Variant::GA:
        return "GA";
    case Variant::GANoCopy:
        return "GA-NoCopy";
    }
    return "unknown";
}

[[nodiscard]] inline Variant parse_variant(const std::string& name) {
    if (name == "EA") {
        return Variant::EA;
    }
    if (name == "GA") {
        return Variant::GA;
    }
    if (name == "GA-NoCopy") {
        return Variant::GANoCopy;
    }
    throw std::invalid_argument("unknown algorithm variant '" + name + "' (expected EA, GA or GA-NoCopy)");
}

struct AlgorithmConfig {
    std::size_t mu = 1;
    double c = 1.0;
    Variant variant = Variant::EA;
    double crossover_probability = 0.5; // ignored by EA

    void validate() const {
        if (mu < 1) {
            throw std::invalid_argument("algorithm: mu must be at least 1");
        }
        if (!(c > 0.0)) {
            throw std::invalid_argument("algorithm: mutation parameter c must be positive");
        }
        if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) {
            throw std::invalid_argument("algorithm: crossover probability must lie in [0, 1]");
        }
        if (variant == Variant::GANoCopy && mu < 2) {
            throw std::invalid_argument("algorithm: GA-NoCopy requires mu >= 2");
        }
    }

    /// Human-readable name such as "(2+1)-GA".
    [[nodiscard]] std::string label() const {
        std::ostringstream os;
        os << '(' << mu << "+1)-" << to_string(variant);
        return os.str();
    }

    friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

struct Population {
    std::vector<Bitstring> members;
    std::uint64_t generation = 0;

    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
    [[nodiscard]] std::size_t length() const noexcept { return members.empty() ? 0 : members.front().size(); }

    [[nodiscard]] std::size_t best_ones() const noexcept {
        std::size_t best = 0;
        for (const auto& m : members) {
            best = std::max(best, m.ones());
        }
        return best;
    }

    [[nodiscard]] bool contains_optimum() const noexcept {
        return std::any_of(members.begin(), members.end(), [](const Bitstring& m) { return m.is_all_ones(); });
    }
};

/// True iff all members are bit-identical.
[[nodiscard]] inline bool is_degenerate(const Population& p) noexcept {
    if (p.members.empty()) {
        return true;
    }
    const Bitstring& first = p.members.front();
    return std::all_of(p.members.begin() + 1, p.members.end(), [&](const Bitstring& m) { return m == first; });
}

[[nodiscard]] inline Population init_population(const AlgorithmConfig& config, std::size_t n, Rng& rng) {
    config.validate();
    if (n < 1) {
        throw std::invalid_argument("init_population: n must be at least 1");
    }
    Population p;
    p.members.reserve(config.mu);
    for (std::size_t i = 0; i < config.mu; ++i) {
        p.members.push_back(new_uniform(n, rng));
    }
    return p;
}

enum class OffspringKind { Mutation, Crossover };

struct StepEvent {
    OffspringKind offspring_kind = OffspringKind::Mutation;
    bool accepted = false;          // offspring survived selection
    bool offspring_is_copy = false; // offspring equal to some pre-step member
    std::optional<std::size_t> new_best_ones;
};

/// Reusable generation-step engine for one configuration and length.
///
/// Owns the mutation operator, selection scratch and offspring buffer so the
/// inner loop does not allocate.
class Stepper {
public:
    Stepper(AlgorithmConfig config, std::size_t n) : config_(config), mutation_(n, config.c) {
        config_.validate();
        if (config_.c > static_cast<double>(n)) {
            throw std::invalid_argument("algorithm: mutation parameter c exceeds n");
        }
        candidates_.reserve(config_.mu + 1);
    }

    [[nodiscard]] const AlgorithmConfig& config() const noexcept { return config_; }

    StepEvent step(Population& pop, const Round& round, Rng& rng) {
        const std::size_t mu = config_.mu;
        if (pop.members.size() != mu) {
            throw std::invalid_argument("step: population size differs from mu");
        }
        const std::size_t best_before = pop.best_ones();

        StepEvent ev;
        if (use_crossover(rng)) {
            ev.offspring_kind = OffspringKind::Crossover;
            const std::size_t i = rng.below(mu);
            std::size_t j = 0;
            if (config_.variant == Variant::GANoCopy) {
                j = rng.below(mu - 1);
                if (j >= i) {
                    ++j;
                }
            } else {
                j = rng.below(mu);
            }
            uniform_crossover_into(pop.members[i], pop.members[j], offspring_, rng);
        } else {
            ev.offspring_kind = OffspringKind::Mutation;
            const std::size_t parent = mu == 1 ? 0 : rng.below(mu);
            mutation_.apply(pop.members[parent], offspring_, rng);
        }

        ev.offspring_is_copy =
            std::any_of(pop.members.begin(), pop.members.end(), [&](const Bitstring& m) { return m == offspring_; });

        candidates_.clear();
        for (const auto& m : pop.members) {
            candidates_.push_back(&m);
        }
        candidates_.push_back(&offspring_);
        const std::size_t worst = selector_(round, candidates_, rng);

        if (worst != mu) {
            ev.accepted = true;
            std::swap(pop.members[worst], offspring_);
            if (pop.members[worst].ones() > best_before) {
                ev.new_best_ones = pop.members[worst].ones();
            }
        }
        ++pop.generation;
        return ev;
    }

private:
    bool use_crossover(Rng& rng) {
        if (config_.variant == Variant::EA) {
            return false;
        }
        const double pc = config_.crossover_probability;
        if (pc <= 0.0) {
            return false;
        }
        if (pc >= 1.0) {
            return true;
        }
        return rng.bernoulli(pc);
    }

    AlgorithmConfig config_;
    StandardBitMutation mutation_;
    WorstSelector selector_;
    Bitstring offspring_;
    std::vector<const Bitstring*> candidates_;
};

/// One generation of the algorithm. Convenience wrapper over `Stepper`.
inline StepEvent step(Population& pop, const AlgorithmConfig& config, const Round& round, Rng& rng) {
    Stepper stepper(config, pop.length());
    return stepper.step(pop, round, rng);
}

/// Outcome of one optimization run. Runtime counts generations.
struct RunRecord {
    std::uint64_t generations = 0;
    bool success = false;
    /// (best ones-count level, first generation it was reached), increasing in
    /// level; starts with the best level of the initial population at 0.
    std::vector<std::pair<std::size_t, std::uint64_t>> first_hit;
    std::uint64_t seed = 0;
};

/// Runs until some member is the all-ones string or `limit` generations pass.
[[nodiscard]] inline RunRecord run(const AlgorithmConfig& config, const EnvironmentSpec& spec, std::size_t n,
                                   std::uint64_t limit, Rng& rng) {
    if (limit < 1) {
        throw std::invalid_argument("run: generation limit must be at least 1");
    }
    RunRecord rec;
    rec.seed = rng.seed();
    Population pop = init_population(config, n, rng);
    RoundSchedule schedule(spec, n);
    Stepper stepper(config, n);

    std::size_t best = pop.best_ones();
    rec.first_hit.emplace_back(best, 0);
    if (pop.contains_optimum()) {
        rec.success = true;
        return rec;
    }
    while (pop.generation < limit) {
        const Round& round = schedule.at(pop.generation + 1, rng);
        const StepEvent ev = stepper.step(pop, round, rng);
        if (ev.new_best_ones) {
            for (std::size_t level = best + 1; level <= *ev.new_best_ones; ++level) {
                rec.first_hit.emplace_back(level, pop.generation);
            }
            best = std::max(best, *ev.new_best_ones);
            if (best == n) {
                rec.success = true;
                break;
            }
        }
    }
    rec.generations = pop.generation;
    return rec;
}

} // namespace dynbv
