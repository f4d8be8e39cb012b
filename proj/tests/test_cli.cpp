#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef DYNBV_CLI_PATH
#error "DYNBV_CLI_PATH must name the CLI binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(DYNBV_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, got);
    }
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("dynbv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& text) {
        const auto p = dir_ / "exp.ini";
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir_;
};

const char* kConfig = R"([grid]
cell = EA mu=2 c=1.5
cell = GA mu=2 c=1.5
[run]
n = 60
runs = 4
seed = 11
y_grid = 2,5
samples = 50
)";

} // namespace

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("bogus").code, 2);
    EXPECT_EQ(run("runtimes").code, 2);
}

TEST_F(Cli, RuntimesByteIdenticalAcrossWorkerCounts) {
    const auto cfg = write_config(kConfig);
    const auto a = dir_ / "a";
    const auto b = dir_ / "b";
    EXPECT_EQ(run("runtimes --config " + cfg.string() + " --workers 1 --out " + a.string()).code, 0);
    EXPECT_EQ(run("runtimes --config " + cfg.string() + " --workers 3 --out " + b.string()).code, 0);
    for (const char* f : {"runtimes_runs.csv", "runtimes_fixed_target.csv", "runtimes_summary.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_EQ(run("runtimes --config " + cfg.string() + " --seed 12 --out " + b.string()).code, 0);
    EXPECT_NE(slurp(a / "runtimes_runs.csv"), slurp(b / "runtimes_runs.csv"));
}

TEST_F(Cli, ConfigErrorsExitTwo) {
    const auto cfg = write_config("[grid]\ncell = EA mu=2 c=1\n[run]\nwidth = 3\n");
    EXPECT_EQ(run("runtimes --config " + cfg.string() + " --out " + dir_.string()).code, 2);
    EXPECT_EQ(run("runtimes --config " + (dir_ / "missing.ini").string()).code, 2);
    EXPECT_EQ(run("validate-onemax --n 50 --out " + dir_.string()).code, 2);
    EXPECT_EQ(run("threshold --model EA --c-lo 0.5 --c-hi 1.5").code, 2);
}

TEST_F(Cli, RuntimeFailureExitsThree) {
    const auto cfg = write_config(kConfig);
    std::ofstream(dir_ / "blocker") << "x";
    EXPECT_EQ(run("runtimes --config " + cfg.string() + " --out " + (dir_ / "blocker" / "sub").string()).code, 3);
}

TEST_F(Cli, DriftMcWritesProfile) {
    const auto cfg = write_config(kConfig);
    EXPECT_EQ(run("drift-mc --config " + cfg.string() + " --out " + dir_.string()).code, 0);
    const std::string csv = slurp(dir_ / "drift.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "algorithm,mu,c,n,y,mean,std_dev,std_err,samples,timeouts");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    const auto no_grid = write_config("[grid]\ncell = EA mu=2 c=1\n[run]\nn = 60\n");
    EXPECT_EQ(run("drift-mc --config " + no_grid.string()).code, 2);
}

TEST_F(Cli, ThresholdPrintsCsv) {
    const auto r = run("threshold --model GA --c-lo 2 --c-hi 5 --tol 0.001");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header;
    std::string row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "model,n,y,c_star,bracket_lo,bracket_hi");
    EXPECT_EQ(row.substr(0, 10), "GA,3000,1,");
    const double c_star = std::stod(row.substr(10));
    EXPECT_GT(c_star, 3.0);
    EXPECT_LT(c_star, 3.2);
}

TEST_F(Cli, DriftAnalyticSweeps) {
    EXPECT_EQ(run("drift-analytic --model EA --c-from 1 --c-to 2 --c-step 0.5 --out " + dir_.string()).code, 0);
    const std::string csv = slurp(dir_ / "analytic_EA.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_NE(csv.find("EA,1.5,3000,1,"), std::string::npos);
    EXPECT_EQ(run("drift-analytic --model GA --c 2 --y-grid 1,2,3 --out " + dir_.string()).code, 0);
    const std::string ga = slurp(dir_ / "analytic_GA.csv");
    EXPECT_NE(ga.find("GA,2,3000,3,"), std::string::npos);
    EXPECT_EQ(run("drift-analytic --model XA").code, 2);
}

TEST_F(Cli, CompareWritesFactor) {
    const auto cfg = write_config(R"([grid]
cell = EA mu=1 c=1
cell = EA mu=1 c=4
[run]
n = 100
runs = 8
seed = 3
)");
    ASSERT_EQ(run("runtimes --config " + cfg.string() + " --out " + dir_.string()).code, 0);
    const auto runs = (dir_ / "runtimes_runs.csv").string();
    const auto r = run("compare --fast-runs " + runs + " --fast EA:1:1 --slow EA:1:4 --out " + dir_.string());
    ASSERT_EQ(r.code, 0);
    const std::string csv = slurp(dir_ / "comparison.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "cell_fast,cell_slow,alternative,alpha,d_max,p_at_d_max");
    EXPECT_NE(csv.find("EA:1:1,EA:1:4,a_less,0.05,"), std::string::npos);
    EXPECT_EQ(run("compare --fast-runs " + runs + " --fast EA:1 --slow EA:1:4").code, 2);
    EXPECT_EQ(run("compare --fast-runs " + runs + " --fast GA:2:1 --slow EA:1:4 --out " + dir_.string()).code, 3);
}

TEST_F(Cli, ValidateOneMax) {
    const auto r = run("validate-onemax --n 200 --runs 10 --seed 1 --out " + dir_.string());
    ASSERT_EQ(r.code, 0);
    const std::string csv = slurp(dir_ / "onemax_summary.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,c,runs,mean_successful,ert,success_rate,reference_e_n_ln_n,ratio");
}
