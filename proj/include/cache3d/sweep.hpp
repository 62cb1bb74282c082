#ifndef CACHE3D_SWEEP_HPP
#define CACHE3D_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include "cache3d/run_config.hpp"

// Area-budget sweep: one optimization per budget point with the other
// constraint blocks held fixed, producing the rows behind the delay /
// area-fraction / layer-allocation charts.

namespace cache3d {

struct SweepRow {
    double area_budget = 0.0;
    int winner_depth = 0;  // 0 = infeasible at this budget
    std::optional<double> delay;
    std::array<double, 3> sizes{};       // sigma units; 0 for absent levels
    std::array<int, 3> layers{};
    std::array<double, 3> area_frac{};   // fraction of used cache area
    std::optional<double> power_used;
    std::optional<double> m_s;
    std::string binding;  // ";"-joined resource names, "-" if none,
                          // "infeasible" for gap rows
};

// Runs the ladder in increasing budget order; each point warm-starts from
// the previous one's per-depth optima, which keeps the optimal delay
// non-increasing in the budget by construction.
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

// Exact schema:
// area_budget,winner_depth,delay,s1,s2,s3,n1,n2,n3,frac1,frac2,frac3,power,m_s,binding
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace cache3d

#endif  // CACHE3D_SWEEP_HPP
