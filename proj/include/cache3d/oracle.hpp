#ifndef CACHE3D_ORACLE_HPP
#define CACHE3D_ORACLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cache3d/optimizer.hpp"

// Brute-force grid search over the full design space, independent of the
// optimizer's search path. Used to validate optimizer results and to derive
// expected values in tests.

namespace cache3d {

struct GridSpec {
    int size_points = 48;       // per size dimension, log-spaced
    bool include_partitions = true;
    int refinement_rounds = 2;  // each round zooms 4x around the incumbent
    // Evaluate the full model per partition assignment instead of the exact
    // per-level decomposition; same result, used for self-checks.
    bool exhaustive_assignments = false;

    void validate() const;
};

struct GridBest {
    OptVector point;
    double delay = std::numeric_limits<double>::infinity();
    bool feasible = false;
    double violation = std::numeric_limits<double>::infinity();
    std::vector<double> round_delays;  // best delay after each round
};

// Evaluates every ordered size tuple of the (possibly refined) grid against
// every partition assignment within the layer budget, filtering by direct
// model evaluation of the constraints (no penalties). Deterministic.
GridBest grid_search(int depth, const ModelParams& params,
                     const ConstraintSet& constraints, const GridSpec& grid,
                     int threads = 1);

struct CompareRow {
    int instance_id = 0;
    int depth = 0;
    double opt_delay = std::numeric_limits<double>::infinity();
    double oracle_delay = std::numeric_limits<double>::infinity();
    bool opt_feasible = false;
    bool oracle_feasible = false;
    double rel_gap = 0.0;
    bool flag = false;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    int flags = 0;
};

// Per-depth optimizer-vs-oracle comparison. Flags rows where the optimizer
// exceeds the oracle by more than 0.5% relative or disagrees on feasibility.
// An optimizer point the coarse grid missed counts as agreement only after
// it re-verifies as feasible under direct model evaluation.
CompareReport compare(const OptimizationResult& opt, const ModelParams& params,
                      const ConstraintSet& constraints, const GridSpec& grid,
                      int instance_id = 0, int threads = 1);

// CSV emission with header instance_id,depth,opt_delay,oracle_delay,rel_gap,flag.
std::string compare_csv(const std::vector<CompareRow>& rows);

// Random constraint instances for acceptance sweeps: budgets drawn
// log-uniform within [0.1x, 10x] of the resource usage of the default
// profile's unconstrained depth-3 optimum (located by grid search).
std::vector<ConstraintSet> seeded_instances(const ModelParams& params, int count,
                                            uint64_t seed, const GridSpec& grid,
                                            int threads = 1);

}  // namespace cache3d

#endif  // CACHE3D_ORACLE_HPP
