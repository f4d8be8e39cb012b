// Command-line front end: runtime experiments, drift estimation, analytic
// drift sweeps, threshold search, rank-sum comparisons and OneMax validation.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynbv/dynbv.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t workers = dynbv::default_workers();
    std::string out_dir;
};

dynbv::ExperimentConfig load_config(const CommonOptions& opt) {
    std::ifstream in(opt.config_path);
    if (!in) {
        throw dynbv::ConfigError(0, "cannot read config file '" + opt.config_path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    dynbv::ExperimentConfig cfg = dynbv::parse_config(ss.str());
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (!opt.out_dir.empty()) {
        cfg.output_dir = opt.out_dir;
    }
    return cfg;
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
    std::filesystem::path p = dir.empty() ? "." : dir;
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + p.string() + "': " + ec.message());
    }
    return p;
}

/// "EA:2:2.0" -> (variant, mu, c)
struct CellRef {
    dynbv::Variant variant;
    std::size_t mu;
    double c;
};

CellRef parse_cell_ref(const std::string& text) {
    const auto a = text.find(':');
    const auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) {
        throw dynbv::ConfigError(0, "cell reference '" + text + "' must look like VARIANT:MU:C, e.g. EA:2:2.0");
    }
    try {
        return {dynbv::parse_variant(text.substr(0, a)),
                static_cast<std::size_t>(dynbv::csv::parse_uint(text.substr(a + 1, b - a - 1))),
                dynbv::csv::parse_double(text.substr(b + 1))};
    } catch (const std::invalid_argument& e) {
        throw dynbv::ConfigError(0, "cell reference '" + text + "': " + e.what());
    }
}

dynbv::DriftModel parse_model(const std::string& name) {
    if (name == "EA") {
        return dynbv::DriftModel::EA;
    }
    if (name == "GA") {
        return dynbv::DriftModel::GA;
    }
    throw dynbv::ConfigError(0, "model must be EA or GA, got '" + name + "'");
}

int cmd_runtimes(const CommonOptions& opt) {
    const dynbv::ExperimentConfig cfg = load_config(opt);
    const auto dir = prepare_out_dir(cfg.output_dir);
    const dynbv::ExperimentTable table = dynbv::run_experiment(dynbv::to_experiment(cfg, opt.workers));
    const auto paths = dynbv::emit_csv(table, (dir / "runtimes_").string());
    for (const auto& cell : table.cells) {
        std::cout << cell.algorithm.label() << " c=" << dynbv::csv::format_double(cell.algorithm.c)
                  << " success_rate=" << dynbv::csv::format_double(cell.summary.success_rate)
                  << " mean=" << dynbv::csv::format_optional(cell.summary.mean_successful)
                  << " ert=" << dynbv::csv::format_double(cell.summary.ert) << '\n';
    }
    std::cout << "wrote " << paths.runs << ", " << paths.fixed_target << ", " << paths.summary << '\n';
    return 0;
}

int cmd_drift_mc(const CommonOptions& opt) {
    const dynbv::ExperimentConfig cfg = load_config(opt);
    if (cfg.y_grid.empty()) {
        throw dynbv::ConfigError(0, "drift-mc needs y_grid in [run]");
    }
    const auto dir = prepare_out_dir(cfg.output_dir);
    const auto path = (dir / "drift.csv").string();
    auto out = dynbv::csv::open_for_write(path);
    bool header = true;
    for (const auto& a : cfg.algorithms) {
        dynbv::Rng rng(dynbv::derive_seed(cfg.seed, {dynbv::cell_id(a)}));
        const auto rows = dynbv::drift_profile(a, cfg.environment, cfg.n, cfg.y_grid, cfg.samples, cfg.sample_cap,
                                               rng, opt.workers);
        dynbv::write_drift_csv(out, a, cfg.n, rows, header);
        header = false;
        for (const auto& e : rows) {
            std::cout << a.label() << " c=" << dynbv::csv::format_double(a.c) << " y=" << e.y
                      << " mean=" << dynbv::csv::format_double(e.mean)
                      << " std_err=" << dynbv::csv::format_double(e.std_err) << " timeouts=" << e.timeouts << '\n';
        }
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
    std::cout << "wrote " << path << '\n';
    return 0;
}

struct AnalyticOptions {
    std::string model = "GA";
    std::size_t n = 3000;
    std::size_t y = 1;
    double c_from = 0.5;
    double c_to = 5.0;
    double c_step = 0.1;
    std::vector<std::size_t> y_grid;
    double c = 2.0;
    std::size_t r_max = dynbv::kDefaultRMax;
    std::string out_dir = ".";
};

int cmd_drift_analytic(const AnalyticOptions& opt) {
    const dynbv::DriftModel model = parse_model(opt.model);
    if (!(opt.c_step > 0.0) || opt.c_to < opt.c_from) {
        throw dynbv::ConfigError(0, "need c-step > 0 and c-to >= c-from");
    }
    std::vector<dynbv::AnalyticRow> rows;
    if (opt.y_grid.empty()) {
        const auto steps = static_cast<std::size_t>(std::floor((opt.c_to - opt.c_from) / opt.c_step + 1e-9));
        for (std::size_t i = 0; i <= steps; ++i) {
            const double c = opt.c_from + static_cast<double>(i) * opt.c_step;
            rows.push_back({c, opt.y, dynbv::analytic_drift(model, {c, opt.n, opt.y, opt.r_max, 0})});
        }
    } else {
        for (std::size_t y : opt.y_grid) {
            rows.push_back({opt.c, y, dynbv::analytic_drift(model, {opt.c, opt.n, y, opt.r_max, 0})});
        }
    }
    const auto dir = prepare_out_dir(opt.out_dir);
    const auto path = (dir / ("analytic_" + opt.model + ".csv")).string();
    auto out = dynbv::csv::open_for_write(path);
    dynbv::write_analytic_csv(out, model, opt.n, opt.r_max, rows);
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    return 0;
}

struct ThresholdOptions {
    std::string model = "GA";
    std::size_t n = 3000;
    std::size_t y = 1;
    double c_lo = 1.0;
    double c_hi = 6.0;
    double tolerance = 0.01;
    std::size_t r_max = dynbv::kDefaultRMax;
};

int cmd_threshold(const ThresholdOptions& opt) {
    const dynbv::DriftModel model = parse_model(opt.model);
    const auto res = dynbv::drift_sign_threshold(model, opt.n, opt.y, opt.c_lo, opt.c_hi, opt.tolerance, opt.r_max);
    std::cout << "model,n,y,c_star,bracket_lo,bracket_hi\n"
              << opt.model << ',' << opt.n << ',' << opt.y << ',' << dynbv::csv::format_double(res.c_star) << ','
              << dynbv::csv::format_double(res.lo) << ',' << dynbv::csv::format_double(res.hi) << '\n';
    return 0;
}

struct CompareOptions {
    std::string fast_runs;
    std::string slow_runs;
    std::string fast_cell;
    std::string slow_cell;
    double alpha = 0.05;
    double tolerance = 0.01;
    std::string censored = "at-cap";
    std::string out_dir = ".";
};

int cmd_compare(const CompareOptions& opt) {
    const CellRef fast_ref = parse_cell_ref(opt.fast_cell);
    const CellRef slow_ref = parse_cell_ref(opt.slow_cell);
    dynbv::CensoredMode mode = dynbv::CensoredMode::AtCap;
    if (opt.censored == "exclude") {
        mode = dynbv::CensoredMode::Exclude;
    } else if (opt.censored != "at-cap") {
        throw dynbv::ConfigError(0, "--censored must be at-cap or exclude");
    }
    const auto fast = dynbv::load_runtime_sample(opt.fast_runs, fast_ref.variant, fast_ref.mu, fast_ref.c);
    const auto slow = dynbv::load_runtime_sample(opt.slow_runs.empty() ? opt.fast_runs : opt.slow_runs,
                                                 slow_ref.variant, slow_ref.mu, slow_ref.c);
    const auto test = dynbv::mann_whitney_u(fast, slow, dynbv::Alternative::Less, mode);
    const auto factor = dynbv::max_significant_factor(fast, slow, opt.alpha, opt.tolerance, mode);
    const auto dir = prepare_out_dir(opt.out_dir);
    const auto path = (dir / "comparison.csv").string();
    auto out = dynbv::csv::open_for_write(path);
    out << "cell_fast,cell_slow,alternative,alpha,d_max,p_at_d_max\n";
    out << opt.fast_cell << ',' << opt.slow_cell << ',' << dynbv::to_string(dynbv::Alternative::Less) << ','
        << dynbv::csv::format_double(opt.alpha) << ','
        << (factor.significant ? dynbv::csv::format_double(factor.d_max) : std::string("NA")) << ','
        << dynbv::csv::format_double(factor.p_at_d_max) << '\n';
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
    std::cout << "U=" << dynbv::csv::format_double(test.u) << " p(d=1)=" << dynbv::csv::format_double(test.p) << '\n';
    if (factor.significant) {
        std::cout << "d_max=" << dynbv::csv::format_double(factor.d_max) << " (bracket ["
                  << dynbv::csv::format_double(factor.d_max) << ", " << dynbv::csv::format_double(factor.d_upper)
                  << "]) p=" << dynbv::csv::format_double(factor.p_at_d_max) << '\n';
    } else {
        std::cout << "not significant at d = 1\n";
    }
    std::cout << "wrote " << path << '\n';
    return 0;
}

struct OneMaxOptions {
    std::size_t n = 1000;
    std::size_t runs = 200;
    double c = 1.0;
    std::uint64_t seed = 0;
    std::size_t workers = dynbv::default_workers();
    std::string out_dir = ".";
};

int cmd_validate_onemax(const OneMaxOptions& opt) {
    dynbv::Rng rng(opt.seed);
    const auto s = dynbv::validate_onemax(opt.n, opt.runs, opt.c, rng, opt.workers);
    const double reference = dynbv::onemax_reference_runtime(static_cast<double>(opt.n));
    const auto dir = prepare_out_dir(opt.out_dir);
    const auto path = (dir / "onemax_summary.csv").string();
    auto out = dynbv::csv::open_for_write(path);
    out << "n,c,runs,mean_successful,ert,success_rate,reference_e_n_ln_n,ratio\n";
    const double mean = s.mean_successful.value_or(std::numeric_limits<double>::quiet_NaN());
    out << opt.n << ',' << dynbv::csv::format_double(opt.c) << ',' << opt.runs << ','
        << dynbv::csv::format_optional(s.mean_successful) << ',' << dynbv::csv::format_double(s.ert) << ','
        << dynbv::csv::format_double(s.success_rate) << ',' << dynbv::csv::format_double(reference) << ','
        << dynbv::csv::format_double(mean / reference) << '\n';
    std::cout << "mean=" << dynbv::csv::format_double(mean) << " e*n*ln(n)=" << dynbv::csv::format_double(reference)
              << " ratio=" << dynbv::csv::format_double(mean / reference)
              << " success_rate=" << dynbv::csv::format_double(s.success_rate) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and analysis of (mu+1) EAs and GAs on Dynamic BinVal"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "experiment config file")->required();
        sub->add_option("--seed", common.seed, "master seed (overrides config)");
        sub->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", common.out_dir, "output directory (overrides config)");
    };
    auto* runtimes = app.add_subcommand("runtimes", "run the algorithm grid and write runtime CSVs");
    add_common(runtimes);
    auto* drift_mc = app.add_subcommand("drift-mc", "Monte-Carlo degenerate-population drift profile");
    add_common(drift_mc);

    AnalyticOptions analytic;
    auto* drift_analytic = app.add_subcommand("drift-analytic", "near-optimum drift formula over c (or y)");
    drift_analytic->add_option("--model", analytic.model, "EA or GA");
    drift_analytic->add_option("--n", analytic.n);
    drift_analytic->add_option("--y", analytic.y);
    drift_analytic->add_option("--c-from", analytic.c_from);
    drift_analytic->add_option("--c-to", analytic.c_to);
    drift_analytic->add_option("--c-step", analytic.c_step);
    drift_analytic->add_option("--y-grid", analytic.y_grid, "sweep y at fixed --c instead of c")->delimiter(',');
    drift_analytic->add_option("--c", analytic.c, "c used with --y-grid");
    drift_analytic->add_option("--r-max", analytic.r_max);
    drift_analytic->add_option("--out", analytic.out_dir);

    ThresholdOptions threshold;
    auto* thr = app.add_subcommand("threshold", "bisection root in c of the analytic drift");
    thr->add_option("--model", threshold.model, "EA or GA");
    thr->add_option("--n", threshold.n);
    thr->add_option("--y", threshold.y);
    thr->add_option("--c-lo", threshold.c_lo);
    thr->add_option("--c-hi", threshold.c_hi);
    thr->add_option("--tol", threshold.tolerance);
    thr->add_option("--r-max", threshold.r_max);

    CompareOptions compare;
    auto* cmp = app.add_subcommand("compare", "rank-sum comparison and largest significant factor d");
    cmp->add_option("--fast-runs", compare.fast_runs, "runs CSV holding the fast cell")->required();
    cmp->add_option("--slow-runs", compare.slow_runs, "runs CSV holding the slow cell (default: --fast-runs)");
    cmp->add_option("--fast", compare.fast_cell, "VARIANT:MU:C")->required();
    cmp->add_option("--slow", compare.slow_cell, "VARIANT:MU:C")->required();
    cmp->add_option("--alpha", compare.alpha);
    cmp->add_option("--tolerance", compare.tolerance);
    cmp->add_option("--censored", compare.censored, "at-cap or exclude");
    cmp->add_option("--out", compare.out_dir);

    OneMaxOptions onemax;
    auto* om = app.add_subcommand("validate-onemax", "(1+1)-EA on OneMax against e n ln n");
    om->add_option("--n", onemax.n);
    om->add_option("--runs", onemax.runs);
    om->add_option("--c", onemax.c);
    om->add_option("--seed", onemax.seed);
    om->add_option("--workers", onemax.workers)->check(CLI::PositiveNumber);
    om->add_option("--out", onemax.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (runtimes->parsed()) {
            return cmd_runtimes(common);
        }
        if (drift_mc->parsed()) {
            return cmd_drift_mc(common);
        }
        if (drift_analytic->parsed()) {
            return cmd_drift_analytic(analytic);
        }
        if (thr->parsed()) {
            return cmd_threshold(threshold);
        }
        if (cmp->parsed()) {
            return cmd_compare(compare);
        }
        if (om->parsed()) {
            return cmd_validate_onemax(onemax);
        }
    } catch (const dynbv::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
