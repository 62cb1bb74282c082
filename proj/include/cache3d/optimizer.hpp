#ifndef CACHE3D_OPTIMIZER_HPP
#define CACHE3D_OPTIMIZER_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cache3d/models.hpp"

// Constrained minimization of the average memory delay over per-level sizes
// (continuous) and per-level 3D partition counts (discrete), per hierarchy
// depth and overall. Partition assignments are enumerated exhaustively under
// the layer budget; sizes are optimized by multi-start simplex descent on a
// quadratic-penalty objective with an escalating weight schedule, then
// polished against the exact feasibility predicate.

namespace cache3d {

struct ConstraintSet {
    std::optional<double> a_max;    // total area budget
    std::optional<double> p_max;    // total power budget
    std::optional<double> m_s_max;  // NoC capacity bound on M_S
    int total_layers = 16;          // available 3D silicon layers

    void validate() const;
};

// Size box searched by the optimizer and the oracle, in sigma units. The
// lower end keeps miss-rate clamping inactive at optima.
inline constexpr double kSizeMin = 1.0;
inline constexpr double kSizeMax = 1e6;

struct OptVector {
    int depth = 1;
    std::array<double, 3> sizes{};  // sigma units, strictly increasing
    std::array<int, 3> layers{};    // N_i = N_xi (N_y = 1)

    HierarchyConfig to_config() const;
};

struct OptimizerOptions {
    uint64_t seed = 1;
    int starts = 8;              // multi-starts per partition assignment
    int threads = 1;             // work split over partition assignments
    int nm_max_iter = 200;       // simplex iterations per stage
    std::vector<OptVector> hints;  // extra warm starts (e.g. sweep ladder)
};

// Penalized realization of the KKT objective: D(x) plus
// penalty_weight * sum of squared raw constraint violations. Model
// evaluation failures (NoC saturation) map to a large finite sentinel of at
// least 1e6 * d_dram so the landscape stays finite.
double penalized_objective(const OptVector& x, const ModelParams& params,
                           const ConstraintSet& constraints,
                           double penalty_weight);

struct GradientResult {
    std::vector<double> dD_dsize;   // one entry per level
    bool one_sided = false;         // some component fell back to one-sided
};

// Central finite-difference gradient of penalized_objective over the level
// sizes (relative step 1e-6, partitions held fixed). Falls back to a
// one-sided difference when the step would cross the size-ordering boundary.
GradientResult gradient_sizes(const OptVector& x, const ModelParams& params,
                              const ConstraintSet& constraints,
                              double penalty_weight);

struct ConstraintGradients {
    std::vector<double> area;         // d(total area)/dS_i
    std::vector<double> power;        // d(total power)/dS_i
    std::vector<double> shared_rate;  // d(M_S)/dS_i (0 where clamped)
};

// Analytic derivatives of the constraint functions at x (sigma units).
ConstraintGradients constraint_gradients(const OptVector& x,
                                         const ModelParams& params);

struct DepthBest {
    int depth = 0;
    OptVector point;
    double delay = std::numeric_limits<double>::infinity();
    bool feasible = false;
    // Sum of relative constraint violations at `point`; 0 when feasible.
    // For infeasible depths `point` is the least-infeasible point found.
    double violation = std::numeric_limits<double>::infinity();
};

DepthBest optimize_depth(int depth, const ModelParams& params,
                         const ConstraintSet& constraints,
                         const OptimizerOptions& options = {});

struct BindingInfo {
    std::string name;          // "area", "power", "noc", "layers"
    double value = 0.0;
    double bound = 0.0;
    double rel_residual = 0.0;  // (value - bound)/bound, <= 0 when feasible
};

struct StationarityInfo {
    double residual_rel = 0.0;  // projected-gradient norm, relative scale
    std::vector<std::string> active;
    std::vector<double> multipliers;  // lambda_j for the active constraints
};

struct OptimizationResult {
    std::array<DepthBest, 3> per_depth;
    int winner_depth = 0;
    OptVector winner;
    double winner_delay = 0.0;
    EvalResult winner_eval;
    std::vector<BindingInfo> binding;
    StationarityInfo stationarity;
};

// Optimizes every depth and combines via objective_min. Throws NoViableConfig
// (with least-infeasible diagnostics in the message) when no depth admits a
// feasible point.
OptimizationResult optimize(const ModelParams& params,
                            const ConstraintSet& constraints,
                            const OptimizerOptions& options = {});

// KKT stationarity check at a feasible point: norm of the delay gradient
// projected against the active-constraint normals (non-negative multipliers
// recovered by least squares), in log-size coordinates relative to D.
StationarityInfo stationarity_residual(const OptVector& x,
                                       const ModelParams& params,
                                       const ConstraintSet& constraints);

}  // namespace cache3d

#endif  // CACHE3D_OPTIMIZER_HPP
