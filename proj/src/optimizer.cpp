#include "cache3d/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cache3d/parallel.hpp"
#include "cache3d/rng.hpp"

namespace cache3d {

namespace {

double sq(double v) { return v * v; }

double sentinel_value(const TechnologyParams& tech) { return 1e6 * tech.d_dram; }

const double kLogSizeMax = std::log(kSizeMax);
const double kLogGapMin = std::log(1e-9);

// ---------------------------------------------------------------------------
// Simplex coordinates. z[0] = ln(S_1), z[i>0] = ln(S_{i+1} - S_i), all in
// sigma units, so strict size ordering holds by construction. Components are
// clamped into the box; the squared clamp distance is returned as a
// dimensionless pullback term added to the inner objective.

struct Mapped {
    HierarchyConfig cfg;
    double pullback = 0.0;
};

Mapped map_point(const std::vector<double>& z, int depth,
                 const std::array<int, 3>& layers) {
    Mapped m;
    m.cfg.depth = depth;
    double s = 0.0;
    for (int i = 0; i < depth; ++i) {
        double lo = (i == 0) ? 0.0 : kLogGapMin;
        double zi = std::clamp(z[i], lo, kLogSizeMax);
        m.pullback += sq(z[i] - zi);
        s += std::exp(zi);
        m.cfg.sizes[i] = s;
        m.cfg.partitions[i] = {layers[i], 1};
    }
    return m;
}

std::vector<double> point_to_z(const OptVector& x) {
    std::vector<double> z(static_cast<std::size_t>(x.depth));
    z[0] = std::log(std::max(x.sizes[0], 1e-12));
    for (int i = 1; i < x.depth; ++i)
        z[i] = std::log(std::max(x.sizes[i] - x.sizes[i - 1], 1e-12));
    return z;
}

// Exact feasibility and diagnostics at a design point. `violation` is the
// sum of relative overruns (resources, size box, NoC saturation); feasible
// means the model evaluated and every overrun is exactly zero. This is the
// same predicate the oracle applies, so both sides agree on feasibility.
struct ExactEval {
    bool evaluated = false;
    EvalResult eval;
    double violation = 0.0;
    bool feasible = false;
};

ExactEval exact_evaluate(const HierarchyConfig& cfg, const ModelParams& params,
                         const ConstraintSet& cons) {
    ExactEval r;
    try {
        r.eval = evaluate(cfg, params);
        r.evaluated = true;
    } catch (const SaturationError& e) {
        r.violation += 1.0 + std::max(0.0, (e.offered_rate() - e.saturation_rate()) /
                                               e.saturation_rate());
    } catch (const Error&) {
        r.violation += 1e3;
    }
    r.violation += std::max(0.0, kSizeMin - cfg.sizes[0]) / kSizeMin;
    r.violation += std::max(0.0, cfg.sizes[cfg.depth - 1] / kSizeMax - 1.0);
    if (r.evaluated) {
        if (cons.a_max)
            r.violation += std::max(0.0, r.eval.total_area / *cons.a_max - 1.0);
        if (cons.p_max)
            r.violation += std::max(0.0, r.eval.total_power / *cons.p_max - 1.0);
        if (cons.m_s_max)
            r.violation +=
                std::max(0.0, r.eval.shared_access_rate / *cons.m_s_max - 1.0);
    }
    r.feasible = r.evaluated && r.violation == 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex descent, deterministic (stable ordering on ties).

struct NMVertex {
    std::vector<double> z;
    double f = 0.0;
};

template <typename F>
std::pair<std::vector<double>, double> nelder_mead(const F& f,
                                                   const std::vector<double>& z0,
                                                   double step0, int max_iter) {
    const std::size_t n = z0.size();
    std::vector<NMVertex> v;
    v.reserve(n + 1);
    v.push_back({z0, f(z0)});
    for (std::size_t i = 0; i < n; ++i) {
        auto z = z0;
        z[i] += step0;
        v.push_back({z, f(z)});
    }
    auto by_f = [](const NMVertex& a, const NMVertex& b) { return a.f < b.f; };
    std::stable_sort(v.begin(), v.end(), by_f);

    std::vector<double> centroid(n), xr(n), xx(n);
    for (int iter = 0; iter < max_iter; ++iter) {
        if (v[n].f - v[0].f <= 1e-12 * (std::abs(v[0].f) + 1e-30)) break;
        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t dJ = 0; dJ < n; ++dJ)
                diam = std::max(diam, std::abs(v[i].z[dJ] - v[0].z[dJ]));
        if (diam <= 1e-10) break;

        for (std::size_t dJ = 0; dJ < n; ++dJ) {
            double c = 0.0;
            for (std::size_t i = 0; i < n; ++i) c += v[i].z[dJ];
            centroid[dJ] = c / static_cast<double>(n);
        }
        for (std::size_t dJ = 0; dJ < n; ++dJ)
            xr[dJ] = centroid[dJ] + (centroid[dJ] - v[n].z[dJ]);
        double fr = f(xr);

        if (fr < v[0].f) {
            for (std::size_t dJ = 0; dJ < n; ++dJ)
                xx[dJ] = centroid[dJ] + 2.0 * (xr[dJ] - centroid[dJ]);
            double fe = f(xx);
            if (fe < fr)
                v[n] = {xx, fe};
            else
                v[n] = {xr, fr};
        } else if (fr < v[n - 1].f) {
            v[n] = {xr, fr};
        } else {
            bool outside = fr < v[n].f;
            const std::vector<double>& toward = outside ? xr : v[n].z;
            for (std::size_t dJ = 0; dJ < n; ++dJ)
                xx[dJ] = centroid[dJ] + 0.5 * (toward[dJ] - centroid[dJ]);
            double fc = f(xx);
            if (fc < (outside ? fr : v[n].f)) {
                v[n] = {xx, fc};
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t dJ = 0; dJ < n; ++dJ)
                        v[i].z[dJ] = v[0].z[dJ] + 0.5 * (v[i].z[dJ] - v[0].z[dJ]);
                    v[i].f = f(v[i].z);
                }
            }
        }
        std::stable_sort(v.begin(), v.end(), by_f);
    }
    return {v[0].z, v[0].f};
}

// ---------------------------------------------------------------------------

std::vector<std::array<int, 3>> enumerate_assignments(int depth,
                                                      int total_layers) {
    std::vector<std::array<int, 3>> out;
    if (depth == 1) {
        for (int n1 = 1; n1 <= total_layers; ++n1) out.push_back({n1, 0, 0});
    } else if (depth == 2) {
        for (int n1 = 1; n1 <= total_layers - 1; ++n1)
            for (int n2 = 1; n2 <= total_layers - n1; ++n2)
                out.push_back({n1, n2, 0});
    } else {
        for (int n1 = 1; n1 <= total_layers - 2; ++n1)
            for (int n2 = 1; n2 <= total_layers - n1 - 1; ++n2)
                for (int n3 = 1; n3 <= total_layers - n1 - n2; ++n3)
                    out.push_back({n1, n2, n3});
    }
    return out;
}

struct AsgResult {
    bool feasible = false;
    double delay = std::numeric_limits<double>::infinity();
    OptVector point;
    double violation = std::numeric_limits<double>::infinity();
};

// Deterministic starts shaped to the budgets: a geometric size ladder scaled
// so the tightest of the present budgets is used at ~60%. Helps when the
// feasible region is a thin shell the log-uniform samples miss.
void push_budget_starts(std::vector<std::vector<double>>& starts, int depth,
                        const ModelParams& params, const ConstraintSet& cons) {
    const auto& tech = params.tech;
    double scale = std::numeric_limits<double>::infinity();
    if (cons.a_max) {
        double denom = 0.0;
        for (int i = 0; i < depth; ++i) denom += std::pow(std::pow(10.0, i), tech.gamma);
        scale = std::min(scale,
                         std::pow(0.6 * *cons.a_max / (tech.alpha * denom), 1.0 / tech.gamma));
    }
    if (cons.p_max) {
        double denom = 0.0;
        for (int i = 0; i < depth; ++i) denom += std::sqrt(std::pow(10.0, i));
        scale = std::min(scale, sq(0.6 * *cons.p_max / (tech.rho * denom)));
    }
    if (!std::isfinite(scale)) return;
    OptVector x;
    x.depth = depth;
    for (int i = 0; i < depth; ++i)
        x.sizes[i] = std::clamp(scale * std::pow(10.0, i), kSizeMin * (1.0 + i),
                                kSizeMax);
    starts.push_back(point_to_z(x));
}

AsgResult solve_assignment(int depth, const std::array<int, 3>& layers,
                           const ModelParams& params, const ConstraintSet& cons,
                           const OptimizerOptions& opts, std::size_t asg_index) {
    const double tau_s = params.tech.tau;
    const double sent = sentinel_value(params.tech) / tau_s;
    const double k_pull = 1e3 * params.tech.d_dram / tau_s;
    const bool constrained = cons.a_max || cons.p_max || cons.m_s_max;

    auto make_x = [&](const HierarchyConfig& cfg) {
        OptVector x;
        x.depth = depth;
        x.sizes = cfg.sizes;
        x.layers = layers;
        return x;
    };

    // Penalty-phase objective, normalized by tau so the landscape (and hence
    // the simplex trajectory) is invariant under uniform time rescaling.
    auto soft = [&](double w) {
        return [&, w](const std::vector<double>& z) {
            Mapped m = map_point(z, depth, layers);
            double f = penalized_objective(make_x(m.cfg), params, cons, w * tau_s) / tau_s;
            return f + k_pull * (m.pullback +
                                 sq(std::max(0.0, m.cfg.sizes[depth - 1] / kSizeMax - 1.0)));
        };
    };
    // Polish-phase objective: exact feasibility filter over the raw delay.
    auto hard = [&](const std::vector<double>& z) {
        Mapped m = map_point(z, depth, layers);
        ExactEval e = exact_evaluate(m.cfg, params, cons);
        double f = e.feasible ? e.eval.avg_delay / tau_s : sent * (1.0 + e.violation);
        return f + k_pull * m.pullback;
    };

    // Assignments that leave layers unused are dominated whenever the access
    // time improves with partition count (the default beta trend), so they
    // get a reduced start budget; the full multi-start policy applies on the
    // layer-exhausting frontier. The oracle enumerates everything exactly and
    // would surface a miss in the comparison suite.
    int layers_used = 0;
    for (int i = 0; i < depth; ++i) layers_used += layers[i];
    const int fresh_starts =
        layers_used == cons.total_layers ? opts.starts : std::min(opts.starts, 2);

    std::vector<std::vector<double>> starts;
    for (const auto& hint : opts.hints)
        if (hint.depth == depth) starts.push_back(point_to_z(hint));
    push_budget_starts(starts, depth, params, cons);
    for (int k = 0; k < fresh_starts; ++k) {
        SplitMix64 rng(mix_seed(opts.seed, static_cast<uint64_t>(depth), asg_index,
                                static_cast<uint64_t>(k)));
        std::vector<double> s(static_cast<std::size_t>(depth));
        for (auto& si : s) si = rng.log_uniform(kSizeMin, kSizeMax);
        std::sort(s.begin(), s.end());
        OptVector x;
        x.depth = depth;
        for (int i = 0; i < depth; ++i) {
            double lo = (i == 0) ? s[0] : x.sizes[i - 1] * (1.0 + 1e-3);
            x.sizes[i] = std::max(s[static_cast<std::size_t>(i)], lo);
        }
        starts.push_back(point_to_z(x));
    }

    const std::array<double, 4> weights = {1e1, 1e2, 1e3, 1e4};
    const int n_weights = constrained ? 4 : 1;
    const int warm_iter = std::min(opts.nm_max_iter, 80);

    AsgResult best;
    for (const auto& start : starts) {
        std::vector<double> z = start;
        for (int wi = 0; wi < n_weights; ++wi) {
            double step = (wi == 0) ? 0.6 : 0.15;
            z = nelder_mead(soft(weights[static_cast<std::size_t>(wi)]), z, step,
                            wi == 0 ? opts.nm_max_iter : warm_iter).first;
        }
        z = nelder_mead(hard, z, 0.05, opts.nm_max_iter).first;

        Mapped m = map_point(z, depth, layers);
        ExactEval e = exact_evaluate(m.cfg, params, cons);
        if (e.feasible) {
            if (!best.feasible || e.eval.avg_delay < best.delay) {
                best.feasible = true;
                best.delay = e.eval.avg_delay;
                best.point = make_x(m.cfg);
                best.violation = 0.0;
            }
        } else if (!best.feasible && e.violation < best.violation) {
            best.violation = e.violation;
            best.delay = e.evaluated ? e.eval.avg_delay
                                     : std::numeric_limits<double>::infinity();
            best.point = make_x(m.cfg);
        }
    }

    return best;
}

// Boundary snap: walk the uniform size-scaling ray in both directions to the
// exact feasibility boundary; keep the endpoint only if it improves the
// delay. Feasibility is monotone along each ray (resources grow with sizes,
// the shared rate shrinks), so bisection applies; it lands any binding
// residual at the bisection resolution.
void boundary_snap(DepthBest& best, const ModelParams& params,
                   const ConstraintSet& cons) {
    if (!best.feasible) return;
    const int depth = best.depth;
    auto scaled_eval = [&](double theta) {
        HierarchyConfig cfg = best.point.to_config();
        for (int i = 0; i < depth; ++i) cfg.sizes[i] *= theta;
        return std::pair<ExactEval, HierarchyConfig>(
            exact_evaluate(cfg, params, cons), cfg);
    };
    auto snap = [&](bool upward) {
        double cap = upward ? kSizeMax / best.point.sizes[depth - 1]
                            : kSizeMin / best.point.sizes[0];
        if ((upward && cap <= 1.0) || (!upward && cap >= 1.0)) return;
        double lo = 1.0;
        if (!scaled_eval(cap).first.feasible) {
            double hi = cap;
            for (int it = 0; it < 90; ++it) {
                double mid = 0.5 * (lo + hi);
                if (scaled_eval(mid).first.feasible)
                    lo = mid;
                else
                    hi = mid;
            }
        } else {
            lo = cap;
        }
        auto [e, cfg] = scaled_eval(lo);
        if (e.feasible && e.eval.avg_delay < best.delay) {
            best.delay = e.eval.avg_delay;
            for (int i = 0; i < depth; ++i) best.point.sizes[i] = cfg.sizes[i];
        }
    };
    if (cons.a_max || cons.p_max) snap(true);
    if (cons.m_s_max) snap(false);
}

double small_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                   std::vector<double>& out) {
    // Gaussian elimination with partial pivoting for k <= 3 unknowns.
    // Returns the pivot magnitude floor (0 => singular).
    const std::size_t k = b.size();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        min_pivot = std::min(min_pivot, std::abs(a[col][col]));
        if (std::abs(a[col][col]) < 1e-300) return 0.0;
        for (std::size_t r = col + 1; r < k; ++r) {
            double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c < k; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    out.assign(k, 0.0);
    for (std::size_t col = k; col-- > 0;) {
        double v = b[col];
        for (std::size_t c = col + 1; c < k; ++c) v -= a[col][c] * out[c];
        out[col] = v / a[col][col];
    }
    return min_pivot;
}

}  // namespace

void ConstraintSet::validate() const {
    if (a_max && !(*a_max > 0.0)) throw DomainError("constraints.a_max must be > 0");
    if (p_max && !(*p_max > 0.0)) throw DomainError("constraints.p_max must be > 0");
    if (m_s_max && !(*m_s_max > 0.0))
        throw DomainError("constraints.m_s_max must be > 0");
    if (total_layers < 1) throw DomainError("constraints.total_layers must be >= 1");
}

HierarchyConfig OptVector::to_config() const {
    HierarchyConfig cfg;
    cfg.depth = depth;
    for (int i = 0; i < depth; ++i) {
        cfg.sizes[i] = sizes[i];
        cfg.partitions[i] = {layers[i], 1};
    }
    return cfg;
}

double penalized_objective(const OptVector& x, const ModelParams& params,
                           const ConstraintSet& constraints,
                           double penalty_weight) {
    const double sent = sentinel_value(params.tech);
    EvalResult ev;
    try {
        ev = evaluate(x.to_config(), params);
    } catch (const SaturationError& e) {
        return sent * (1.0 + std::max(0.0, (e.offered_rate() - e.saturation_rate()) /
                                               e.saturation_rate()));
    } catch (const Error&) {
        return sent;
    }
    double penalty = 0.0;
    if (constraints.a_max)
        penalty += sq(std::max(0.0, ev.total_area - *constraints.a_max));
    if (constraints.p_max)
        penalty += sq(std::max(0.0, ev.total_power - *constraints.p_max));
    if (constraints.m_s_max)
        penalty += sq(std::max(0.0, ev.shared_access_rate - *constraints.m_s_max));
    return ev.avg_delay + penalty_weight * penalty;
}

GradientResult gradient_sizes(const OptVector& x, const ModelParams& params,
                              const ConstraintSet& constraints,
                              double penalty_weight) {
    GradientResult out;
    out.dD_dsize.resize(static_cast<std::size_t>(x.depth));
    for (int i = 0; i < x.depth; ++i) {
        const double s = x.sizes[i];
        const double h = 1e-6 * s;
        auto f_at = [&](double si) {
            OptVector y = x;
            y.sizes[i] = si;
            return penalized_objective(y, params, constraints, penalty_weight);
        };
        bool up_ok = (i + 1 >= x.depth) || (s + h < x.sizes[i + 1]);
        bool dn_ok = (i == 0) ? (s - h > 0.0) : (s - h > x.sizes[i - 1]);
        if (up_ok && dn_ok) {
            out.dD_dsize[i] = (f_at(s + h) - f_at(s - h)) / (2.0 * h);
        } else if (up_ok) {
            out.dD_dsize[i] = (f_at(s + h) - f_at(s)) / h;
            out.one_sided = true;
        } else if (dn_ok) {
            out.dD_dsize[i] = (f_at(s) - f_at(s - h)) / h;
            out.one_sided = true;
        } else {
            out.dD_dsize[i] = 0.0;
            out.one_sided = true;
        }
    }
    return out;
}

ConstraintGradients constraint_gradients(const OptVector& x,
                                         const ModelParams& params) {
    const auto& tech = params.tech;
    const auto& w = params.workload;
    const int d = x.depth;
    ConstraintGradients g;
    g.area.assign(static_cast<std::size_t>(d), 0.0);
    g.power.assign(static_cast<std::size_t>(d), 0.0);
    g.shared_rate.assign(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        g.area[i] = tech.alpha * tech.gamma * std::pow(x.sizes[i], tech.gamma - 1.0);
        g.power[i] = 0.5 * tech.rho / std::sqrt(x.sizes[i]);
    }
    // M_S derivatives from the unclamped miss-rate forms; a clamped rate is
    // locally constant so its derivative is zero.
    const double s1 = x.sizes[0];
    if (d == 1) {
        double raw = w.mu_n + (1.0 - w.mu_n) * tech.mu * w.e_n / std::sqrt(s1);
        if (raw < 1.0)
            g.shared_rate[0] = -0.5 * (1.0 - w.mu_n) * tech.mu * w.e_n * std::pow(s1, -1.5);
    } else if (d == 2) {
        double raw = w.mu_n + (1.0 - w.mu_n) * tech.mu / std::sqrt(s1);
        if (raw < 1.0)
            g.shared_rate[0] = -0.5 * (1.0 - w.mu_n) * tech.mu * std::pow(s1, -1.5);
    } else {
        const double gap = x.sizes[1] - s1;
        double raw1 = w.mu_n + (1.0 - w.mu_n) * tech.mu / std::sqrt(s1);
        double raw2 = w.mu_n + (1.0 - w.mu_n) * tech.mu / std::sqrt(gap);
        double m1 = std::min(raw1, 1.0);
        double m2 = std::min(raw2, 1.0);
        double dm1 = raw1 < 1.0
                         ? -0.5 * (1.0 - w.mu_n) * tech.mu * std::pow(s1, -1.5)
                         : 0.0;
        double dm2_dgap = raw2 < 1.0
                              ? -0.5 * (1.0 - w.mu_n) * tech.mu * std::pow(gap, -1.5)
                              : 0.0;
        g.shared_rate[0] = m2 * dm1 - m1 * dm2_dgap;
        g.shared_rate[1] = m1 * dm2_dgap;
    }
    return g;
}

DepthBest optimize_depth(int depth, const ModelParams& params,
                         const ConstraintSet& constraints,
                         const OptimizerOptions& options) {
    if (depth < 1 || depth > 3) throw DomainError("depth must be 1, 2 or 3");
    params.validate();
    constraints.validate();

    DepthBest best;
    best.depth = depth;
    auto assignments = enumerate_assignments(depth, constraints.total_layers);
    if (assignments.empty()) return best;  // layer budget below depth

    std::vector<AsgResult> results(assignments.size());
    parallel_for_indexed(assignments.size(), options.threads, [&](std::size_t i) {
        results[i] =
            solve_assignment(depth, assignments[i], params, constraints, options, i);
    });

    for (const auto& r : results) {
        bool better;
        if (r.feasible != best.feasible) {
            better = r.feasible;
        } else if (best.feasible) {
            better = r.delay < best.delay;
        } else {
            better = r.violation < best.violation;
        }
        if (better) {
            best.feasible = r.feasible;
            best.delay = r.delay;
            best.point = r.point;
            best.violation = r.violation;
        }
    }
    boundary_snap(best, params, constraints);
    return best;
}

OptimizationResult optimize(const ModelParams& params,
                            const ConstraintSet& constraints,
                            const OptimizerOptions& options) {
    OptimizationResult res;
    std::array<std::optional<double>, 3> delays;
    for (int depth = 1; depth <= 3; ++depth) {
        res.per_depth[depth - 1] = optimize_depth(depth, params, constraints, options);
        if (res.per_depth[depth - 1].feasible)
            delays[depth - 1] = res.per_depth[depth - 1].delay;
    }
    if (!delays[0] && !delays[1] && !delays[2]) {
        int least = 0;
        for (int i = 1; i < 3; ++i)
            if (res.per_depth[i].violation < res.per_depth[least].violation) least = i;
        std::ostringstream msg;
        msg << "no viable configuration under the given budgets; least infeasible: "
            << "depth " << (least + 1) << " with total relative violation "
            << res.per_depth[least].violation;
        throw NoViableConfig(msg.str());
    }

    auto choice = objective_min(delays[0], delays[1], delays[2]);
    res.winner_depth = choice.depth;
    res.winner_delay = choice.delay;
    res.winner = res.per_depth[choice.depth - 1].point;
    res.winner_eval = evaluate(res.winner.to_config(), params);

    auto maybe_binding = [&](const std::string& name, double value,
                             const std::optional<double>& bound) {
        if (!bound) return;
        double rel = (value - *bound) / *bound;
        if (std::abs(rel) <= 1e-3) res.binding.push_back({name, value, *bound, rel});
    };
    maybe_binding("area", res.winner_eval.total_area, constraints.a_max);
    maybe_binding("power", res.winner_eval.total_power, constraints.p_max);
    maybe_binding("noc", res.winner_eval.shared_access_rate, constraints.m_s_max);
    int layers_used = 0;
    for (int i = 0; i < res.winner.depth; ++i) layers_used += res.winner.layers[i];
    if (layers_used == constraints.total_layers)
        res.binding.push_back({"layers", static_cast<double>(layers_used),
                               static_cast<double>(constraints.total_layers), 0.0});

    res.stationarity = stationarity_residual(res.winner, params, constraints);
    return res;
}

StationarityInfo stationarity_residual(const OptVector& x,
                                       const ModelParams& params,
                                       const ConstraintSet& constraints) {
    const int d = x.depth;
    StationarityInfo info;

    auto grad = gradient_sizes(x, params, constraints, 0.0).dD_dsize;
    auto cg = constraint_gradients(x, params);
    EvalResult ev = evaluate(x.to_config(), params);

    // Work in log-size coordinates: components s_i * d/ds_i. The relative
    // residual is then (change in D per relative size change) / D.
    std::vector<double> G(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) G[i] = x.sizes[i] * grad[i];

    struct Normal {
        std::string name;
        std::vector<double> n;
    };
    std::vector<Normal> normals;
    auto maybe_active = [&](const std::string& name, double value,
                            const std::optional<double>& bound,
                            const std::vector<double>& raw) {
        if (!bound) return;
        if (std::abs(value - *bound) / *bound > 1e-3) return;
        std::vector<double> n(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) n[i] = x.sizes[i] * raw[i];
        normals.push_back({name, n});
    };
    maybe_active("area", ev.total_area, constraints.a_max, cg.area);
    maybe_active("power", ev.total_power, constraints.p_max, cg.power);
    maybe_active("noc", ev.shared_access_rate, constraints.m_s_max, cg.shared_rate);
    // The search box is part of the optimization domain: a level pinned at
    // the size floor (or cap) contributes its bound's normal as well.
    for (int i = 0; i < d; ++i) {
        if (x.sizes[i] <= kSizeMin * (1.0 + 1e-3)) {
            std::vector<double> n(static_cast<std::size_t>(d), 0.0);
            n[i] = -x.sizes[i];  // gradient of -s_i <= -kSizeMin, log coords
            normals.push_back({"size_min_l" + std::to_string(i + 1), n});
        } else if (x.sizes[i] >= kSizeMax * (1.0 - 1e-3)) {
            std::vector<double> n(static_cast<std::size_t>(d), 0.0);
            n[i] = x.sizes[i];
            normals.push_back({"size_max_l" + std::to_string(i + 1), n});
        }
    }

    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double c : v) s += c * c;
        return std::sqrt(s);
    };

    const std::size_t k = normals.size();
    double best_res = norm2(G);
    std::vector<double> best_lambda(k, 0.0);
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < k; ++j)
            if (mask & (1u << j)) idx.push_back(j);
        const std::size_t m = idx.size();
        std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
        std::vector<double> atb(m, 0.0);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b)
                for (int i = 0; i < d; ++i)
                    ata[a][b] += normals[idx[a]].n[i] * normals[idx[b]].n[i];
            for (int i = 0; i < d; ++i) atb[a] -= normals[idx[a]].n[i] * G[i];
        }
        std::vector<double> lambda;
        if (small_solve(ata, atb, lambda) == 0.0) continue;
        bool nonneg = true;
        for (double l : lambda)
            if (l < -1e-12) nonneg = false;
        if (!nonneg) continue;
        std::vector<double> r = G;
        for (std::size_t a = 0; a < m; ++a)
            for (int i = 0; i < d; ++i)
                r[i] += std::max(0.0, lambda[a]) * normals[idx[a]].n[i];
        double res = norm2(r);
        if (res < best_res) {
            best_res = res;
            best_lambda.assign(k, 0.0);
            for (std::size_t a = 0; a < m; ++a)
                best_lambda[idx[a]] = std::max(0.0, lambda[a]);
        }
    }

    info.residual_rel = best_res / std::max(std::abs(ev.avg_delay), 1e-300);
    for (std::size_t j = 0; j < k; ++j) {
        info.active.push_back(normals[j].name);
        info.multipliers.push_back(best_lambda[j]);
    }
    return info;
}

}  // namespace cache3d
