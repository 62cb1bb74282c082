#include "cache3d/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cache3d {

namespace {

// const char* overload keeps the hot evaluation paths allocation-free.
void require(bool cond, const char* msg) {
    if (!cond) throw DomainError(msg);
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void TechnologyParams::validate() const {
    require(sigma > 0.0, "technology.sigma_bytes must be > 0");
    require(tau > 0.0, "technology.tau must be > 0");
    require(mu > 0.0 && mu < 1.0, "technology.mu must satisfy 0 < mu < 1");
    require(rho > 0.0, "technology.rho must be > 0");
    require(d_dram > 0.0, "technology.d_dram must be > 0");
    require(alpha > 0.0, "technology.alpha must be > 0");
    require(gamma > 1.0, "technology.gamma must be > 1 (area superlinear in size)");
    require(!beta_table.empty(), "technology.beta_table must not be empty");
    for (const auto& [layers, beta] : beta_table) {
        require(layers >= 1, "technology.beta_table keys must be >= 1");
        require(beta > 0.0, "technology.beta_table exponents must be > 0");
    }
}

void WorkloadParams::validate() const {
    require(n_cores >= 1, "workload.n_cores must be >= 1");
    require(e_n > 0.0 && e_n <= 1.0, "workload.e_n must satisfy 0 < e_n <= 1");
    require(mu_n >= 0.0 && mu_n < 1.0, "workload.mu_n must satisfy 0 <= mu_n < 1");
}

void NocParams::validate() const {
    require(c_transfer >= 0.0, "noc.c_transfer must be >= 0");
    require(k_queue >= 0.0, "noc.k_queue must be >= 0");
    require(m_saturation > 0.0 && m_saturation <= 1.0,
            "noc.m_saturation must satisfy 0 < m_saturation <= 1");
}

void ModelParams::validate() const {
    tech.validate();
    workload.validate();
    noc.validate();
}

void HierarchyConfig::validate() const {
    require(depth >= 1 && depth <= 3, "hierarchy depth must be 1, 2 or 3");
    for (int i = 0; i < depth; ++i) {
        if (!(sizes[i] > 0.0))
            throw DomainError("level size must be > 0 (level " +
                              std::to_string(i + 1) + ")");
        if (partitions[i].nx < 1 || partitions[i].ny < 1)
            throw DomainError("partition counts must be >= 1 (level " +
                              std::to_string(i + 1) + ")");
    }
    for (int i = 1; i < depth; ++i) {
        if (!(sizes[i] > sizes[i - 1]))
            throw DomainError(
                "inclusive hierarchy requires strictly increasing sizes: S" +
                std::to_string(i + 1) + " <= S" + std::to_string(i));
    }
}

double beta_for(const TechnologyParams& tech, int partition_count) {
    require(partition_count >= 1, "partition count must be >= 1");
    require(!tech.beta_table.empty(), "beta_table must not be empty");
    auto it = tech.beta_table.upper_bound(partition_count);
    if (it == tech.beta_table.begin()) return it->second;  // below smallest key
    return std::prev(it)->second;
}

double access_time_private(double size, int nx, int ny,
                           const TechnologyParams& tech) {
    require(size > 0.0, "access_time_private: size must be > 0");
    require(nx >= 1 && ny >= 1, "access_time_private: partitions must be >= 1");
    int count = nx * ny;
    return tech.tau * std::pow(size / count, beta_for(tech, count));
}

NocDelayParts noc_delay_parts(double m_s, const WorkloadParams& workload,
                              const NocParams& noc) {
    require(m_s >= 0.0, "noc_delay: access rate must be >= 0");
    NocDelayParts parts;
    parts.transfer = noc.c_transfer * std::sqrt(static_cast<double>(workload.n_cores));
    if (noc.k_queue > 0.0) {
        if (m_s >= noc.m_saturation) throw SaturationError(m_s, noc.m_saturation);
        parts.queue = noc.k_queue * m_s / (noc.m_saturation - m_s);
    }
    return parts;
}

double noc_delay(double m_s, const WorkloadParams& workload,
                 const NocParams& noc) {
    return noc_delay_parts(m_s, workload, noc).total();
}

double access_time_shared(double size, int nx, int ny, double m_s,
                          const TechnologyParams& tech,
                          const WorkloadParams& workload,
                          const NocParams& noc) {
    require(size > 0.0, "access_time_shared: size must be > 0");
    require(nx >= 1 && ny >= 1, "access_time_shared: partitions must be >= 1");
    int count = nx * ny;
    double per_core = size / workload.n_cores;
    return noc_delay(m_s, workload, noc) +
           tech.tau * std::pow(per_core / count, beta_for(tech, count));
}

MissProfile miss_rates(const HierarchyConfig& config,
                      const TechnologyParams& tech,
                      const WorkloadParams& workload) {
    config.validate();
    const double mu = tech.mu;
    const double mu_n = workload.mu_n;
    const double e_n = workload.e_n;
    const double n = workload.n_cores;

    MissProfile mp;
    switch (config.depth) {
        case 1: {
            mp.m[0] = clamp01(mu_n + (1.0 - mu_n) * mu * e_n / std::sqrt(config.sizes[0]));
            mp.shared_rate = mp.m[0];
            break;
        }
        case 2: {
            mp.m[0] = clamp01(mu_n + (1.0 - mu_n) * mu / std::sqrt(config.sizes[0]));
            mp.m[1] = clamp01(mu * e_n /
                              std::sqrt((config.sizes[1] - config.sizes[0]) / n));
            mp.shared_rate = mp.m[0];
            break;
        }
        case 3: {
            mp.m[0] = clamp01(mu_n + (1.0 - mu_n) * mu / std::sqrt(config.sizes[0]));
            mp.m[1] = clamp01(mu_n + (1.0 - mu_n) * mu /
                                         std::sqrt(config.sizes[1] - config.sizes[0]));
            mp.m[2] = clamp01(mu * e_n /
                              std::sqrt((config.sizes[2] - config.sizes[1]) / n));
            mp.shared_rate = mp.m[0] * mp.m[1];
            break;
        }
        default:
            throw DomainError("hierarchy depth must be 1, 2 or 3");
    }
    return mp;
}

double total_power(const HierarchyConfig& config, const TechnologyParams& tech) {
    config.validate();
    double power = 0.0;
    for (int i = 0; i < config.depth; ++i) power += tech.rho * std::sqrt(config.sizes[i]);
    return power;
}

double total_area(const HierarchyConfig& config, const TechnologyParams& tech) {
    config.validate();
    double area = 0.0;
    for (int i = 0; i < config.depth; ++i)
        area += tech.alpha * std::pow(config.sizes[i], tech.gamma);
    return area;
}

EvalResult evaluate(const HierarchyConfig& config, const ModelParams& params) {
    MissProfile mp = miss_rates(config, params.tech, params.workload);
    NocDelayParts noc = noc_delay_parts(mp.shared_rate, params.workload, params.noc);

    EvalResult r;
    r.depth = config.depth;
    r.miss_rates = mp.m;
    r.shared_access_rate = mp.shared_rate;
    r.noc_transfer = noc.transfer;
    r.noc_queue = noc.queue;

    const double d_dram = params.tech.d_dram;
    const int last = config.depth - 1;
    for (int i = 0; i < config.depth; ++i) {
        const auto& part = config.partitions[i];
        if (i == last && config.depth >= 2) {
            // Shared level: NoC delay assembled from the parts computed above.
            double per_core = config.sizes[i] / params.workload.n_cores;
            int count = part.count();
            r.access_times[i] =
                noc.total() + params.tech.tau *
                                  std::pow(per_core / count, beta_for(params.tech, count));
        } else {
            r.access_times[i] =
                access_time_private(config.sizes[i], part.nx, part.ny, params.tech);
        }
    }

    const auto& m = mp.m;
    const auto& t = r.access_times;
    switch (config.depth) {
        case 1:
            r.avg_delay = (1.0 - m[0]) * t[0] + m[0] * (noc.total() + d_dram);
            break;
        case 2:
            r.avg_delay = (1.0 - m[0]) * t[0] + m[0] * (1.0 - m[1]) * t[1] +
                          m[0] * m[1] * d_dram;
            break;
        case 3:
            r.avg_delay = (1.0 - m[0]) * t[0] + m[0] * (1.0 - m[1]) * t[1] +
                          m[0] * m[1] * (1.0 - m[2]) * t[2] +
                          m[0] * m[1] * m[2] * d_dram;
            break;
    }

    r.total_power = total_power(config, params.tech);
    r.total_area = total_area(config, params.tech);
    return r;
}

DepthChoice objective_min(std::optional<double> d1, std::optional<double> d12,
                          std::optional<double> d123) {
    DepthChoice best;
    best.depth = 0;
    const std::array<std::optional<double>, 3> delays = {d1, d12, d123};
    for (int depth = 1; depth <= 3; ++depth) {
        const auto& d = delays[depth - 1];
        if (!d) continue;
        if (best.depth == 0 || *d < best.delay) {
            best.delay = *d;
            best.depth = depth;
        }
    }
    if (best.depth == 0)
        throw NoViableConfig("no feasible hierarchy configuration at any depth");
    return best;
}

}  // namespace cache3d
