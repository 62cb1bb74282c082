// End-to-end checks of the cache3d binary: exit codes, output files, and
// the documented command surface. The binary path comes from CMake.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cache3d/fitting.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path log = fs::temp_directory_path() /
                   ("cache3d_cli_" + std::to_string(counter++) + ".log");
    std::string cmd = std::string(CACHE3D_BIN) + " " + args + " > " +
                      log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    fs::remove(log);
    return r;
}

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "cache3d_cli_test";
    fs::create_directories(dir);
    return dir;
}

TEST(Cli, NoArgumentsIsUsageError) {
    auto r = run_cli("");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, EvalBaselinePoint) {
    auto r = run_cli("eval --depth 1 --sizes 4096");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("t = 1"), std::string::npos);
    EXPECT_NE(r.output.find("avg delay"), std::string::npos);
}

TEST(Cli, EvalSaturatedPointExitsInfeasible) {
    auto r = run_cli("eval --depth 1 --sizes 40");  // ~0.01 sigma
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("infeasible"), std::string::npos);
    EXPECT_NE(r.output.find("saturated"), std::string::npos);
}

TEST(Cli, EvalRejectsBrokenOrdering) {
    auto r = run_cli("eval --depth 2 --sizes 8192,8192");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, ConfigErrorsExitOne) {
    auto dir = temp_dir();
    auto conf = dir / "bad.conf";
    std::ofstream(conf) << "technology.gamma = 0.9\n";
    auto r = run_cli("eval --depth 1 --sizes 4096 --config " + conf.string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("gamma must be > 1"), std::string::npos);

    std::ofstream(conf) << "nosuch.key = 1\n";
    auto r2 = run_cli("eval --depth 1 --sizes 4096 --config " + conf.string());
    EXPECT_EQ(r2.exit_code, 1);
    EXPECT_NE(r2.output.find("unknown configuration keys"), std::string::npos);
}

TEST(Cli, OptimizeInfeasibleBudgetExitsTwo) {
    auto dir = temp_dir();
    auto conf = dir / "impossible.conf";
    std::ofstream(conf) << "constraints.a_max = 0.1\n";
    auto r = run_cli("optimize --config " + conf.string() + " --out " +
                     dir.string());
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("no viable configuration"), std::string::npos);
}

TEST(Cli, FitWritesMachineReadableResult) {
    auto dir = temp_dir();
    auto csv = dir / "samples.csv";
    {
        cache3d::TechnologyParams tech;
        auto samples = cache3d::generate_synthetic_samples(
            tech, cache3d::default_size_grid_bytes(), {1, 4}, 0.0, 9);
        std::ofstream out(csv);
        out << "size_bytes,layers,value\n";
        for (const auto& s : samples)
            out << s.size_bytes << ',' << s.layers << ',' << s.value << '\n';
    }
    auto r = run_cli("fit " + csv.string() + " --kind time --out " + dir.string());
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("pooled"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "fit_result.json"));

    auto bad = run_cli("fit " + (dir / "missing.csv").string() + " --kind time");
    EXPECT_EQ(bad.exit_code, 1);
}

TEST(Cli, OptimizeVerifyRunsOracleCrossCheck) {
    auto dir = temp_dir();
    auto conf = dir / "verify.conf";
    std::ofstream(conf) << "constraints.a_max = 30\n"
                        << "constraints.total_layers = 8\n"
                        << "oracle.size_points = 24\n"
                        << "oracle.refinement_rounds = 1\n";
    auto r = run_cli("optimize --verify --config " + conf.string() + " --out " +
                     dir.string());
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("verification clean"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "verify_report.csv"));
    EXPECT_TRUE(fs::exists(dir / "optimize_result.json"));
}

TEST(Cli, OptimizeConfigEchoesProvenance) {
    auto dir = temp_dir();
    auto conf = dir / "gamma.conf";
    std::ofstream(conf) << "technology.gamma = 1.42\n";
    auto r = run_cli("eval --depth 1 --sizes 4096 --config " + conf.string());
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("technology.gamma = 1.42 [from config]"),
              std::string::npos);
    EXPECT_NE(r.output.find("technology.alpha = 0.25 [paper default]"),
              std::string::npos);
}

}  // namespace
