#pragma once

/// @file harness.hpp
/// @brief Batches of seeded runs, runtime aggregation and CSV emission.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dynbv/csv.hpp"
#include "dynbv/environment.hpp"
#include "dynbv/evolve.hpp"
#include "dynbv/random.hpp"
#include "dynbv/stats.hpp"

namespace dynbv {

inline constexpr double kDefaultCapMultiplier = 100.0;
inline constexpr std::size_t kDefaultRunsPerCell = 30;

/// Generation cap floor(multiplier * e^c / c * n ln n): `multiplier` times the
/// expected runtime of the (1+1)-EA on linear functions.
[[nodiscard]] inline std::uint64_t generation_limit(double c, double n, double multiplier = kDefaultCapMultiplier) {
    if (!(c > 0.0)) {
        throw std::invalid_argument("generation_limit: c must be positive");
    }
    if (!(n >= 2.0)) {
        throw std::invalid_argument("generation_limit: n must be at least 2");
    }
    if (!(multiplier > 0.0)) {
        throw std::invalid_argument("generation_limit: multiplier must be positive");
    }
    const double cap = std::floor(multiplier * std::exp(c) / c * n * std::log(n));
    // Keep headroom so sums of many capped runs stay exact in 64 bits.
    if (!(cap < 0x1.0p62)) {
        throw std::overflow_error("generation_limit: cap exceeds the 64-bit generation counter");
    }
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cap));
}

struct RuntimeSummary {
    std::optional<double> mean_successful;                   // undefined without successes
    double ert = std::numeric_limits<double>::infinity();    // total time / successes
    double success_rate = 0.0;
    std::size_t run_count = 0;
    std::uint64_t cap = 0;
};

/// Mean over successful runs and ERT (restart expectation, which equals total
/// generations over all runs divided by the number of successes).
[[nodiscard]] inline RuntimeSummary summarize(std::span<const RunRecord> runs, std::uint64_t cap) {
    if (runs.empty()) {
        throw std::invalid_argument("summarize: no runs");
    }
    RuntimeSummary s;
    s.run_count = runs.size();
    s.cap = cap;
    uint128 total = 0;
    uint128 successful_total = 0;
    std::size_t successes = 0;
    for (const auto& r : runs) {
        total += r.generations;
        if (r.success) {
            successful_total += r.generations;
            ++successes;
        }
    }
    s.success_rate = static_cast<double>(successes) / static_cast<double>(runs.size());
    if (successes > 0) {
        s.mean_successful = static_cast<double>(successful_total) / static_cast<double>(successes);
        s.ert = static_cast<double>(total) / static_cast<double>(successes);
    }
    return s;
}

/// Runs fn(i) for i in [0, count) on `workers` threads. Each index is handled
/// by exactly one worker; the first exception is rethrown after joining.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        const std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                        next.store(count);
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

[[nodiscard]] inline std::size_t default_workers() {
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Stable identity of a grid cell, independent of its position in the grid.
[[nodiscard]] inline std::uint64_t cell_id(const AlgorithmConfig& a) {
    return derive_seed(static_cast<std::uint64_t>(a.variant),
                       {a.mu, std::bit_cast<std::uint64_t>(a.c), std::bit_cast<std::uint64_t>(a.crossover_probability)});
}

[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t master, const AlgorithmConfig& a, std::size_t run_index) {
    return derive_seed(master, {cell_id(a), run_index});
}

struct Experiment {
    EnvironmentSpec environment;
    std::vector<AlgorithmConfig> algorithms;
    std::size_t n = 0;
    std::size_t runs = kDefaultRunsPerCell;
    std::uint64_t seed = 0;
    double cap_multiplier = kDefaultCapMultiplier;
    std::size_t workers = 1;
};

struct CellResult {
    AlgorithmConfig algorithm;
    std::uint64_t cap = 0;
    std::vector<RunRecord> runs;
    RuntimeSummary summary;
};

struct ExperimentTable {
    EnvironmentSpec environment;
    std::size_t n = 0;
    std::vector<CellResult> cells;
};

/// Executes every (cell, run) pair. Output is identical for any worker count.
[[nodiscard]] inline ExperimentTable run_experiment(const Experiment& ex) {
    if (ex.runs < 1) {
        throw std::invalid_argument("run_experiment: runs per cell must be at least 1");
    }
    if (ex.n < 2) {
        throw std::invalid_argument("run_experiment: n must be at least 2");
    }
    ex.environment.validate(ex.n);
    ExperimentTable table;
    table.environment = ex.environment;
    table.n = ex.n;
    for (const auto& a : ex.algorithms) {
        a.validate();
        CellResult cell;
        cell.algorithm = a;
        cell.cap = generation_limit(a.c, static_cast<double>(ex.n), ex.cap_multiplier);
        cell.runs.resize(ex.runs);
        table.cells.push_back(std::move(cell));
    }
    const std::size_t tasks = table.cells.size() * ex.runs;
    parallel_for(tasks, ex.workers, [&](std::size_t t) {
        CellResult& cell = table.cells[t / ex.runs];
        const std::size_t run_index = t % ex.runs;
        Rng rng(run_seed(ex.seed, cell.algorithm, run_index));
        cell.runs[run_index] = run(cell.algorithm, ex.environment, ex.n, cell.cap, rng);
    });
    for (auto& cell : table.cells) {
        cell.summary = summarize(cell.runs, cell.cap);
    }
    return table;
}

struct CsvPaths {
    std::string runs;
    std::string fixed_target;
    std::string summary;
};

[[nodiscard]] inline CsvPaths csv_paths(const std::string& prefix) {
    return {prefix + "runs.csv", prefix + "fixed_target.csv", prefix + "summary.csv"};
}

/// Writes `<prefix>runs.csv`, `<prefix>fixed_target.csv` and `<prefix>summary.csv`.
inline CsvPaths emit_csv(const ExperimentTable& table, const std::string& prefix) {
    if (table.cells.empty()) {
        throw std::invalid_argument("emit_csv: empty table");
    }
    const CsvPaths paths = csv_paths(prefix);
    auto runs = csv::open_for_write(paths.runs);
    auto fixed = csv::open_for_write(paths.fixed_target);
    auto summary = csv::open_for_write(paths.summary);
    runs << "algorithm,mu,c,n,environment,seed,run_index,generations,success\n";
    fixed << "algorithm,mu,c,n,run_index,ones_level,first_hit_generation\n";
    summary << "algorithm,mu,c,n,mean_successful,ert,success_rate,run_count,cap\n";
    const std::string env = table.environment.label();
    for (const auto& cell : table.cells) {
        const std::string alg = to_string(cell.algorithm.variant);
        const std::string mu = std::to_string(cell.algorithm.mu);
        const std::string c = csv::format_double(cell.algorithm.c);
        const std::string n = std::to_string(table.n);
        for (std::size_t i = 0; i < cell.runs.size(); ++i) {
            const RunRecord& r = cell.runs[i];
            runs << alg << ',' << mu << ',' << c << ',' << n << ',' << env << ',' << r.seed << ',' << i << ','
                 << r.generations << ',' << (r.success ? 1 : 0) << '\n';
            for (const auto& [level, gen] : r.first_hit) {
                fixed << alg << ',' << mu << ',' << c << ',' << n << ',' << i << ',' << level << ',' << gen << '\n';
            }
        }
        const RuntimeSummary& s = cell.summary;
        summary << alg << ',' << mu << ',' << c << ',' << n << ',' << csv::format_optional(s.mean_successful) << ','
                << csv::format_double(s.ert) << ',' << csv::format_double(s.success_rate) << ',' << s.run_count << ','
                << s.cap << '\n';
    }
    for (auto* f : {&runs, &fixed, &summary}) {
        f->flush();
        if (!*f) {
            throw std::runtime_error("emit_csv: write failed under prefix '" + prefix + "'");
        }
    }
    return paths;
}

/// (1+1)-EA on static OneMax, for comparison with e n ln n.
[[nodiscard]] inline RuntimeSummary validate_onemax(std::size_t n, std::size_t runs, double c, Rng& rng,
                                                    std::size_t workers = 1) {
    if (n < 100) {
        throw std::invalid_argument("validate_onemax: n must be at least 100");
    }
    Experiment ex;
    ex.environment.kind = EnvironmentKind::OneMax;
    ex.algorithms = {AlgorithmConfig{1, c, Variant::EA, 0.5}};
    ex.n = n;
    ex.runs = runs;
    ex.seed = rng();
    ex.workers = workers;
    return run_experiment(ex).cells.front().summary;
}

/// Leading-order expected runtime e n ln n of the (1+1)-EA with c=1 on OneMax.
[[nodiscard]] inline double onemax_reference_runtime(double n) {
    return std::numbers::e * n * std::log(n);
}

/// Runtimes of one cell read back from a runs CSV; failed runs are censored.
[[nodiscard]] inline RuntimeSample load_runtime_sample(const std::string& runs_csv, Variant variant, std::size_t mu,
                                                       double c) {
    const csv::Table t = csv::Table::read(runs_csv);
    RuntimeSample sample;
    for (std::size_t row = 0; row < t.rows(); ++row) {
        if (t.at(row, "algorithm") != to_string(variant) || csv::parse_uint(t.at(row, "mu")) != mu ||
            csv::parse_double(t.at(row, "c")) != c) {
            continue;
        }
        sample.values.push_back(static_cast<double>(csv::parse_uint(t.at(row, "generations"))));
        sample.censored.push_back(t.at(row, "success") != "1");
    }
    if (sample.values.empty()) {
        throw std::runtime_error("no runs for " + to_string(variant) + " mu=" + std::to_string(mu) +
                                 " c=" + csv::format_double(c) + " in '" + runs_csv + "'");
    }
    return sample;
}

[[nodiscard]] inline RuntimeSample runtime_sample(const CellResult& cell) {
    RuntimeSample s;
    for (const auto& r : cell.runs) {
        s.values.push_back(static_cast<double>(r.generations));
        s.censored.push_back(!r.success);
    }
    return s;
}

} // namespace dynbv
