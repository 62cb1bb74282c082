#ifndef CACHE3D_MODELS_HPP
#define CACHE3D_MODELS_HPP

#include <array>
#include <map>
#include <optional>

#include "cache3d/errors.hpp"

// Closed-form models for 3D-stacked CMP cache hierarchies: per-level access
// time, miss rates, NoC delay, average memory delay, power and silicon area.
// All cache sizes in this library are expressed as ratios S/sigma relative to
// the baseline cache size; the CLI converts bytes at the boundary. Time is in
// units of tau, power in units of rho, area is abstract.

namespace cache3d {

struct TechnologyParams {
    double sigma = 4096.0;  // baseline cache size, bytes (CLI-boundary only)
    double tau = 1.0;       // baseline access time at S = sigma, 1 partition
    double mu = 0.1;        // baseline miss rate at S = sigma
    double rho = 1.0;       // baseline cache power at S = sigma
    // Access-time exponent per 3D partition count. Intermediate counts use
    // the nearest key below; counts under the smallest key use the smallest.
    std::map<int, double> beta_table = {
        {1, 0.50}, {2, 0.49}, {4, 0.48}, {8, 0.47}, {16, 0.46}};
    double alpha = 0.25;    // area power-law coefficient
    double gamma = 1.40;    // area power-law exponent, > 1
    double d_dram = 200.0;  // DRAM access penalty, in tau units

    void validate() const;
};

struct WorkloadParams {
    int n_cores = 16;
    double e_n = 0.8;     // data sharing factor, 0 < e_n <= 1
    double mu_n = 0.005;  // compulsory miss-rate component, 0 <= mu_n < 1

    void validate() const;
};

struct NocParams {
    double c_transfer = 1.0;    // transfer delay = c_transfer * sqrt(n)
    double k_queue = 2.0;       // blocking+queuing coefficient
    double m_saturation = 0.5;  // queue-model pole, 0 < m_saturation <= 1

    void validate() const;
};

struct ModelParams {
    TechnologyParams tech;
    WorkloadParams workload;
    NocParams noc;

    void validate() const;
};

struct LevelPartition {
    int nx = 1;
    int ny = 1;
    int count() const { return nx * ny; }
};

// A candidate design point. Levels 1..depth; level sizes are total capacity
// (for the shared last level of depth 2/3 this is the whole shared cache).
// The hierarchy is inclusive, so sizes must be strictly increasing.
struct HierarchyConfig {
    int depth = 1;
    std::array<double, 3> sizes{};  // S_i / sigma
    std::array<LevelPartition, 3> partitions{};

    void validate() const;
};

struct MissProfile {
    std::array<double, 3> m{};  // per-level miss rates, clamped to [0, 1]
    double shared_rate = 0.0;   // M_S, the NoC offered load
};

struct NocDelayParts {
    double transfer = 0.0;  // d_t
    double queue = 0.0;     // d_b + d_c
    double total() const { return transfer + queue; }
};

struct EvalResult {
    int depth = 0;
    std::array<double, 3> access_times{};
    std::array<double, 3> miss_rates{};
    double shared_access_rate = 0.0;
    double noc_transfer = 0.0;
    double noc_queue = 0.0;
    double avg_delay = 0.0;
    double total_power = 0.0;
    double total_area = 0.0;
};

// Exponent lookup: largest beta_table key <= partition_count, falling back
// to the smallest key for counts below it.
double beta_for(const TechnologyParams& tech, int partition_count);

// Private-level access time: tau * ((S/sigma) / (nx*ny))^beta.
double access_time_private(double size, int nx, int ny,
                           const TechnologyParams& tech);

// NoC delay d_t + d_b + d_c with the queue term k*m/(m_sat - m). Throws
// SaturationError at or beyond the pole when k_queue > 0; with k_queue == 0
// the queue model is disabled and only the transfer term remains.
NocDelayParts noc_delay_parts(double m_s, const WorkloadParams& workload,
                              const NocParams& noc);
double noc_delay(double m_s, const WorkloadParams& workload,
                 const NocParams& noc);

// Shared-level access time: d_NoC + tau * ((S/(n*sigma)) / (nx*ny))^beta.
double access_time_shared(double size, int nx, int ny, double m_s,
                          const TechnologyParams& tech,
                          const WorkloadParams& workload,
                          const NocParams& noc);

// Per-level miss rates and the shared access rate M_S. Rates are clamped to
// [0, 1] after evaluation so delays stay defined over the whole search
// domain; the optimizer keeps clamping inactive at optima via size floors.
MissProfile miss_rates(const HierarchyConfig& config,
                      const TechnologyParams& tech,
                      const WorkloadParams& workload);

// Total cache power sum(rho * sqrt(S_j/sigma)); independent of partitioning.
double total_power(const HierarchyConfig& config, const TechnologyParams& tech);

// Total silicon area sum(alpha * (S_j/sigma)^gamma) over all levels.
double total_area(const HierarchyConfig& config, const TechnologyParams& tech);

// Full design-point evaluation: access times, miss rates, NoC components and
// the average memory delay for the configured depth. Throws SaturationError
// when the NoC cannot service the shared access rate.
EvalResult evaluate(const HierarchyConfig& config, const ModelParams& params);

struct DepthChoice {
    double delay = 0.0;
    int depth = 0;
};

// min over the feasible per-depth delays; ties resolve toward smaller depth.
// Throws NoViableConfig when every input is absent.
DepthChoice objective_min(std::optional<double> d1, std::optional<double> d12,
                          std::optional<double> d123);

}  // namespace cache3d

#endif  // CACHE3D_MODELS_HPP
