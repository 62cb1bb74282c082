#ifndef CACHE3D_RUN_CONFIG_HPP
#define CACHE3D_RUN_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cache3d/oracle.hpp"

// Flat `section.key = value` run configuration with `#` comments. Missing
// keys fall back to the documented default profile; unknown keys are errors.
// Every effective value carries a provenance tag ("from config", "paper
// default", "profile default") echoed to the log by the CLI.

namespace cache3d {

struct SweepSpec {
    double budget_min = 0.3;
    double budget_max = 30000.0;
    int points = 40;
    bool log_spacing = true;
};

struct RunConfig {
    ModelParams params;
    ConstraintSet constraints;
    SweepSpec sweep;
    GridSpec oracle;
    uint64_t seed = 1;
    int starts = 8;
    int threads = 1;
    std::string output_dir = ".";
    std::vector<std::string> provenance;  // one line per effective key

    void validate() const;  // throws ConfigError naming the violated invariant
};

// The built-in default profile (no file). sigma = 4 KB, tau = rho = 1,
// mu = 0.1, mu_n = 0.005, e_n = 0.8, n = 16, d_dram = 200, c_transfer = 1,
// k_queue = 2, m_saturation = 0.5; alpha and gamma sit at the published
// technology-survey midpoints. Everything is overridable.
RunConfig default_run_config();

RunConfig parse_config_stream(std::istream& in, const std::string& name);
RunConfig parse_config_file(const std::string& path);

std::vector<double> sweep_budgets(const SweepSpec& sweep);

}  // namespace cache3d

#endif  // CACHE3D_RUN_CONFIG_HPP
