#pragma once

/// @file config.hpp
/// @brief Experiment configuration documents.
///
/// Flat INI-style key/value text with three sections:
///
///     [environment]
///     kind = DynBV            # DynBV | DynamicLinear | OneMax
///     beta = 1.0              # Pareto shape, DynamicLinear only
///     period = 1              # fresh objective every `period` generations
///
///     [grid]
///     cell = EA mu=2 c=1.5
///     cell = GA mu=2 c=2.5 crossover=0.5
///
///     [run]
///     n = 500
///     runs = 30
///     seed = 1
///     cap_multiplier = 100
///     output_dir = out
///     y_grid = 1, 10, 150     # drift-mc only
///     samples = 10000         # drift-mc only
///     sample_cap = 1000000    # drift-mc only
///
/// '#' starts a comment. Errors carry the 1-based line number.

#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "dynbv/csv.hpp"
#include "dynbv/drift.hpp"
#include "dynbv/environment.hpp"
#include "dynbv/evolve.hpp"
#include "dynbv/harness.hpp"

namespace dynbv {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : std::runtime_error(line == 0 ? "config: " + what : "config:" + std::to_string(line) + ": " + what),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ExperimentConfig {
    EnvironmentSpec environment;
    std::vector<AlgorithmConfig> algorithms;
    std::size_t n = 0;
    std::size_t runs = kDefaultRunsPerCell;
    std::uint64_t seed = 0;
    double cap_multiplier = kDefaultCapMultiplier;
    std::string output_dir = ".";
    std::vector<std::size_t> y_grid;
    std::uint64_t samples = 10000;
    std::uint64_t sample_cap = kDefaultDriftSampleCap;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double config_double(const std::string& v, std::size_t line, const std::string& key) {
    try {
        return csv::parse_double(v);
    } catch (const std::exception&) {
        throw ConfigError(line, "'" + key + "' expects a number, got '" + v + "'");
    }
}

inline std::uint64_t config_uint(const std::string& v, std::size_t line, const std::string& key) {
    try {
        return csv::parse_uint(v);
    } catch (const std::exception&) {
        throw ConfigError(line, "'" + key + "' expects a non-negative integer, got '" + v + "'");
    }
}

inline AlgorithmConfig parse_cell(const std::string& text, std::size_t line) {
    std::istringstream in(text);
    std::string variant;
    in >> variant;
    AlgorithmConfig a;
    try {
        a.variant = parse_variant(variant);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line, e.what());
    }
    bool have_mu = false;
    bool have_c = false;
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line, "cell option '" + token + "' is not of the form key=value");
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "mu") {
            a.mu = config_uint(value, line, key);
            have_mu = true;
        } else if (key == "c") {
            a.c = config_double(value, line, key);
            have_c = true;
        } else if (key == "crossover") {
            a.crossover_probability = config_double(value, line, key);
        } else {
            throw ConfigError(line, "unknown cell option '" + key + "'");
        }
    }
    if (!have_mu || !have_c) {
        throw ConfigError(line, "cell needs both mu=... and c=...");
    }
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line, e.what());
    }
    return a;
}

} // namespace detail

[[nodiscard]] inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    bool have_n = false;
    bool have_beta = false;
    std::size_t kind_line = 0;
    std::set<std::tuple<int, std::size_t, double>> seen;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(std::string_view(raw).substr(0, raw.find('#')));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(line_no, "malformed section header '" + line + "'");
            }
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (section != "environment" && section != "grid" && section != "run") {
                throw ConfigError(line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line_no, "expected key = value");
        }
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (section.empty()) {
            throw ConfigError(line_no, "key '" + key + "' outside of any section");
        }
        if (section == "environment") {
            if (key == "kind") {
                try {
                    cfg.environment.kind = parse_environment_kind(value);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(line_no, e.what());
                }
                kind_line = line_no;
            } else if (key == "beta") {
                cfg.environment.weights = WeightDistribution::pareto(detail::config_double(value, line_no, key));
                have_beta = true;
                if (!(cfg.environment.weights.shape > 0.0)) {
                    throw ConfigError(line_no, "beta must be positive");
                }
            } else if (key == "period") {
                cfg.environment.change_period = detail::config_uint(value, line_no, key);
                if (cfg.environment.change_period < 1) {
                    throw ConfigError(line_no, "period must be at least 1");
                }
            } else {
                throw ConfigError(line_no, "unknown key '" + key + "' in [environment]");
            }
        } else if (section == "grid") {
            if (key != "cell") {
                throw ConfigError(line_no, "unknown key '" + key + "' in [grid] (expected 'cell')");
            }
            AlgorithmConfig a = detail::parse_cell(value, line_no);
            if (!seen.emplace(static_cast<int>(a.variant), a.mu, a.c).second) {
                throw ConfigError(line_no, "duplicate cell " + a.label() + " c=" + csv::format_double(a.c));
            }
            cfg.algorithms.push_back(a);
        } else {
            if (key == "n") {
                cfg.n = detail::config_uint(value, line_no, key);
                have_n = true;
                if (cfg.n < 2) {
                    throw ConfigError(line_no, "n must be at least 2");
                }
            } else if (key == "runs") {
                cfg.runs = detail::config_uint(value, line_no, key);
                if (cfg.runs < 1) {
                    throw ConfigError(line_no, "runs must be at least 1");
                }
            } else if (key == "seed") {
                cfg.seed = detail::config_uint(value, line_no, key);
            } else if (key == "cap_multiplier") {
                cfg.cap_multiplier = detail::config_double(value, line_no, key);
                if (!(cfg.cap_multiplier > 0.0)) {
                    throw ConfigError(line_no, "cap_multiplier must be positive");
                }
            } else if (key == "output_dir") {
                cfg.output_dir = value;
            } else if (key == "y_grid") {
                cfg.y_grid.clear();
                for (const auto& item : csv::split(value)) {
                    cfg.y_grid.push_back(detail::config_uint(detail::trim(item), line_no, key));
                }
            } else if (key == "samples") {
                cfg.samples = detail::config_uint(value, line_no, key);
                if (cfg.samples < 1) {
                    throw ConfigError(line_no, "samples must be at least 1");
                }
            } else if (key == "sample_cap") {
                cfg.sample_cap = detail::config_uint(value, line_no, key);
            } else {
                throw ConfigError(line_no, "unknown key '" + key + "' in [run]");
            }
        }
    }
    if (!have_n) {
        throw ConfigError(0, "missing required key 'n' in [run]");
    }
    if (cfg.algorithms.empty()) {
        throw ConfigError(0, "[grid] must contain at least one cell");
    }
    if (have_beta && cfg.environment.kind != EnvironmentKind::DynamicLinear) {
        throw ConfigError(kind_line, "beta is only meaningful for kind = DynamicLinear");
    }
    for (std::size_t y : cfg.y_grid) {
        if (y < 1 || y > cfg.n) {
            throw ConfigError(0, "y_grid values must lie in [1, n]");
        }
    }
    for (const auto& a : cfg.algorithms) {
        if (a.c > static_cast<double>(cfg.n)) {
            throw ConfigError(0, "cell " + a.label() + " has c larger than n");
        }
    }
    return cfg;
}

/// Serializes a config so that parse_config(emit_config(c)) == c.
[[nodiscard]] inline std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[environment]\n";
    out << "kind = " << to_string(cfg.environment.kind) << '\n';
    if (cfg.environment.kind == EnvironmentKind::DynamicLinear) {
        out << "beta = " << csv::format_double(cfg.environment.weights.shape) << '\n';
    }
    out << "period = " << cfg.environment.change_period << "\n\n[grid]\n";
    for (const auto& a : cfg.algorithms) {
        out << "cell = " << to_string(a.variant) << " mu=" << a.mu << " c=" << csv::format_double(a.c)
            << " crossover=" << csv::format_double(a.crossover_probability) << '\n';
    }
    out << "\n[run]\n";
    out << "n = " << cfg.n << '\n';
    out << "runs = " << cfg.runs << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "cap_multiplier = " << csv::format_double(cfg.cap_multiplier) << '\n';
    out << "output_dir = " << cfg.output_dir << '\n';
    if (!cfg.y_grid.empty()) {
        out << "y_grid = ";
        for (std::size_t i = 0; i < cfg.y_grid.size(); ++i) {
            out << (i ? "," : "") << cfg.y_grid[i];
        }
        out << '\n';
    }
    out << "samples = " << cfg.samples << '\n';
    out << "sample_cap = " << cfg.sample_cap << '\n';
    return out.str();
}

[[nodiscard]] inline Experiment to_experiment(const ExperimentConfig& cfg, std::size_t workers) {
    Experiment ex;
    ex.environment = cfg.environment;
    ex.algorithms = cfg.algorithms;
    ex.n = cfg.n;
    ex.runs = cfg.runs;
    ex.seed = cfg.seed;
    ex.cap_multiplier = cfg.cap_multiplier;
    ex.workers = workers;
    return ex;
}

} // namespace dynbv
