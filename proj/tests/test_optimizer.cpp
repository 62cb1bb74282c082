#include "cache3d/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cache3d/rng.hpp"

using namespace cache3d;

namespace {

OptVector opt_point(int depth, std::array<double, 3> sizes,
                    std::array<int, 3> layers) {
    OptVector x;
    x.depth = depth;
    x.sizes = sizes;
    x.layers = layers;
    return x;
}

// Test-side 1-D oracle: golden-section search over ln(S_1) for the depth-1
// unconstrained delay at fixed partitioning.
double golden_min_size(const ModelParams& params, int n1) {
    auto delay = [&](double log_s) {
        HierarchyConfig cfg;
        cfg.depth = 1;
        cfg.sizes[0] = std::exp(log_s);
        cfg.partitions[0] = {n1, 1};
        return evaluate(cfg, params).avg_delay;
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = std::log(kSizeMax);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (delay(c) < delay(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return std::exp(0.5 * (a + b));
}

TEST(PenalizedObjective, EqualsDelayWhenFeasible) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 1e9;
    cons.p_max = 1e9;
    cons.m_s_max = 0.9;
    auto x = opt_point(2, {4.0, 64.0, 0.0}, {8, 8, 0});
    double d = evaluate(x.to_config(), p).avg_delay;
    EXPECT_DOUBLE_EQ(penalized_objective(x, p, cons, 1e4), d);
}

TEST(PenalizedObjective, QuadraticAreaOverrun) {
    ModelParams p;
    auto x = opt_point(1, {16.0, 0.0, 0.0}, {4, 0, 0});
    auto ev = evaluate(x.to_config(), p);
    ConstraintSet cons;
    cons.a_max = ev.total_area * 0.8;
    double delta = ev.total_area - *cons.a_max;
    for (double w : {10.0, 1e3}) {
        EXPECT_DOUBLE_EQ(penalized_objective(x, p, cons, w),
                         ev.avg_delay + w * delta * delta);
    }
}

TEST(PenalizedObjective, SaturatedPointHitsSentinel) {
    ModelParams p;  // default m_saturation = 0.5
    ConstraintSet cons;
    auto x = opt_point(1, {0.01, 0.0, 0.0}, {1, 0, 0});
    EXPECT_GE(penalized_objective(x, p, cons, 10.0), 1e6 * p.tech.d_dram);
}

TEST(GradientSizes, VanishesAtLineSearchOptimum) {
    ModelParams p;
    ConstraintSet cons;
    double s_star = golden_min_size(p, 16);
    auto x = opt_point(1, {s_star, 0.0, 0.0}, {16, 0, 0});
    auto g = gradient_sizes(x, p, cons, 0.0);
    double d = evaluate(x.to_config(), p).avg_delay;
    EXPECT_LT(std::abs(g.dD_dsize[0]), 1e-4 * d / s_star);
    EXPECT_FALSE(g.one_sided);
}

TEST(GradientSizes, DepthControlsComponentCount) {
    ModelParams p;
    ConstraintSet cons;
    auto x2 = opt_point(2, {4.0, 64.0, 0.0}, {8, 8, 0});
    EXPECT_EQ(gradient_sizes(x2, p, cons, 0.0).dD_dsize.size(), 2u);
    auto x3 = opt_point(3, {4.0, 64.0, 512.0}, {8, 4, 4});
    EXPECT_EQ(gradient_sizes(x3, p, cons, 0.0).dD_dsize.size(), 3u);
}

TEST(GradientSizes, PenaltyTermMatchesAnalyticDerivative) {
    // Just past the area boundary the penalty contributes 2*w*delta*dg/dS.
    ModelParams p;
    auto x = opt_point(1, {50.0, 0.0, 0.0}, {16, 0, 0});
    auto ev = evaluate(x.to_config(), p);
    ConstraintSet cons;
    cons.a_max = ev.total_area * (1.0 - 1e-3);
    double delta = ev.total_area - *cons.a_max;
    double w = 1e3;
    auto with_pen = gradient_sizes(x, p, cons, w);
    auto without = gradient_sizes(x, p, cons, 0.0);
    double measured = with_pen.dD_dsize[0] - without.dD_dsize[0];
    double dg =
        p.tech.alpha * p.tech.gamma * std::pow(x.sizes[0], p.tech.gamma - 1.0);
    double analytic = 2.0 * w * delta * dg;
    EXPECT_NEAR(measured / analytic, 1.0, 1e-3);
}

TEST(GradientSizes, OneSidedFallbackAtOrderingBoundary) {
    ModelParams p;
    ConstraintSet cons;
    auto x = opt_point(2, {16.0, 16.0 * (1.0 + 1e-9), 0.0}, {8, 8, 0});
    auto g = gradient_sizes(x, p, cons, 0.0);
    EXPECT_TRUE(g.one_sided);
}

TEST(ConstraintGradients, MatchFiniteDifferences) {
    ModelParams p;
    SplitMix64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        int depth = 1 + static_cast<int>(rng.uniform01() * 3);
        if (depth > 3) depth = 3;
        OptVector x;
        x.depth = depth;
        double s = rng.log_uniform(2.0, 1e4);
        for (int i = 0; i < depth; ++i) {
            x.sizes[i] = s;
            x.layers[i] = 1 + static_cast<int>(rng.uniform01() * 4);
            s *= rng.uniform(1.5, 20.0);
        }
        auto cg = constraint_gradients(x, p);
        for (int i = 0; i < depth; ++i) {
            double h = 1e-6 * x.sizes[i];
            auto at = [&](double si, auto&& fn) {
                OptVector y = x;
                y.sizes[i] = si;
                return fn(y.to_config());
            };
            auto fd = [&](auto&& fn) {
                return (at(x.sizes[i] + h, fn) - at(x.sizes[i] - h, fn)) / (2.0 * h);
            };
            double fd_area =
                fd([&](const HierarchyConfig& c) { return total_area(c, p.tech); });
            double fd_power =
                fd([&](const HierarchyConfig& c) { return total_power(c, p.tech); });
            double fd_ms = fd([&](const HierarchyConfig& c) {
                return miss_rates(c, p.tech, p.workload).shared_rate;
            });
            EXPECT_NEAR(cg.area[i] / fd_area, 1.0, 1e-3);
            EXPECT_NEAR(cg.power[i] / fd_power, 1.0, 1e-3);
            if (std::abs(fd_ms) > 1e-14)
                EXPECT_NEAR(cg.shared_rate[i] / fd_ms, 1.0, 1e-3);
            else
                EXPECT_NEAR(cg.shared_rate[i], 0.0, 1e-12);
        }
    }
}

TEST(OptimizeDepth, MatchesDenseScanDepthOne) {
    ModelParams p;
    ConstraintSet cons;
    // Dense test-side oracle: 2048 log-spaced sizes x every layer count.
    double best_scan = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2048; ++i) {
        double s = std::exp(std::log(kSizeMax) * i / 2047.0);
        for (int n = 1; n <= cons.total_layers; ++n) {
            HierarchyConfig cfg;
            cfg.depth = 1;
            cfg.sizes[0] = s;
            cfg.partitions[0] = {n, 1};
            best_scan = std::min(best_scan, evaluate(cfg, p).avg_delay);
        }
    }
    auto best = optimize_depth(1, p, cons);
    ASSERT_TRUE(best.feasible);
    EXPECT_LE(best.delay, best_scan * 1.005);
    EXPECT_NEAR(best.delay / best_scan, 1.0, 0.005);
}

TEST(OptimizeDepth, EmptyFeasibleSetReported) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 0.5;  // below the minimum area of any ordered triple
    auto best = optimize_depth(3, p, cons);
    EXPECT_FALSE(best.feasible);
    EXPECT_GT(best.violation, 0.0);
}

TEST(Optimize, GenerousBudgetsPickDepthThree) {
    ModelParams p;
    ConstraintSet cons;  // unconstrained
    auto res = optimize(p, cons);
    EXPECT_EQ(res.winner_depth, 3);
    for (const auto& d : res.per_depth) EXPECT_TRUE(d.feasible);
    EXPECT_LE(res.per_depth[2].delay, res.per_depth[1].delay);
    EXPECT_LE(res.per_depth[1].delay, res.per_depth[0].delay);
}

TEST(Optimize, TightPowerLargeAreaCollapsesToSingleLevel) {
    ModelParams p;
    ConstraintSet cons;
    cons.p_max = 2.2;
    cons.a_max = 1000.0;
    auto res = optimize(p, cons);
    EXPECT_EQ(res.winner_depth, 1);
}

TEST(Optimize, AllBudgetsBelowFloorThrows) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 0.1;  // below even the single-level floor alpha*1^gamma
    EXPECT_THROW(optimize(p, cons), NoViableConfig);
}

TEST(Optimize, BindingAreaResidualTiny) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 50.0;
    auto res = optimize(p, cons);
    bool found = false;
    for (const auto& b : res.binding) {
        if (b.name == "area") {
            found = true;
            EXPECT_LE(std::abs(b.rel_residual), 1e-4);
        }
    }
    EXPECT_TRUE(found);
    // Feasibility contract: no constraint exceeded beyond 1e-6 relative.
    EXPECT_LE(res.winner_eval.total_area, *cons.a_max * (1.0 + 1e-6));

    // The depth-2 optimum binds the same budget; its own residual is as tight.
    const auto& d2 = res.per_depth[1];
    ASSERT_TRUE(d2.feasible);
    double area2 = evaluate(d2.point.to_config(), p).total_area;
    EXPECT_LE(area2, *cons.a_max);
    EXPECT_LE(std::abs(area2 - *cons.a_max) / *cons.a_max, 1e-4);
}

TEST(Optimize, WinnerExhaustsLayerBudget) {
    ModelParams p;
    for (int total : {8, 16}) {
        ConstraintSet cons;
        cons.total_layers = total;
        auto res = optimize(p, cons);
        int used = 0;
        for (int i = 0; i < res.winner.depth; ++i) used += res.winner.layers[i];
        EXPECT_EQ(used, total);
    }
}

TEST(Optimize, DeterministicAcrossRunsAndThreads) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 50.0;
    cons.p_max = 14.0;
    auto a = optimize(p, cons);
    auto b = optimize(p, cons);
    OptimizerOptions threaded;
    threaded.threads = 3;
    auto c = optimize(p, cons, threaded);
    for (const auto* other : {&b, &c}) {
        EXPECT_EQ(a.winner_depth, other->winner_depth);
        EXPECT_EQ(a.winner_delay, other->winner_delay);
        for (int d = 0; d < 3; ++d) {
            EXPECT_EQ(a.per_depth[d].delay, other->per_depth[d].delay);
            for (int i = 0; i < 3; ++i) {
                EXPECT_EQ(a.per_depth[d].point.sizes[i],
                          other->per_depth[d].point.sizes[i]);
                EXPECT_EQ(a.per_depth[d].point.layers[i],
                          other->per_depth[d].point.layers[i]);
            }
        }
    }
}

TEST(Optimize, TimeScaleInvariance) {
    // Scaling all time constants by 4 (exact in binary floating point) must
    // leave the winning sizes and partitions bit-identical and scale the
    // delay exactly.
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 50.0;
    auto base = optimize(p, cons);
    ModelParams q = p;
    q.tech.tau *= 4.0;
    q.tech.d_dram *= 4.0;
    q.noc.c_transfer *= 4.0;
    q.noc.k_queue *= 4.0;
    auto scaled = optimize(q, cons);
    EXPECT_EQ(scaled.winner_depth, base.winner_depth);
    EXPECT_EQ(scaled.winner_delay, 4.0 * base.winner_delay);
    for (int i = 0; i < base.winner.depth; ++i) {
        EXPECT_EQ(scaled.winner.sizes[i], base.winner.sizes[i]);
        EXPECT_EQ(scaled.winner.layers[i], base.winner.layers[i]);
    }
}

TEST(Optimize, BudgetMonotoneOnLadder) {
    ModelParams p;
    OptimizerOptions opts;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
        ConstraintSet cons;
        cons.a_max = 0.5 * std::pow(10.0, 3.0 * k / 9.0);
        auto res = optimize(p, cons, opts);
        EXPECT_LE(res.winner_delay, prev);
        prev = res.winner_delay;
        opts.hints.clear();
        for (const auto& d : res.per_depth)
            if (d.feasible) opts.hints.push_back(d.point);
    }
}

TEST(Stationarity, SmallAtOptimumLargeAway) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 50.0;
    auto res = optimize(p, cons);
    EXPECT_LT(res.stationarity.residual_rel, 1e-3);

    // A deliberately non-optimal feasible point scores materially worse.
    OptVector off = res.winner;
    for (int i = 0; i < off.depth; ++i) off.sizes[i] *= 0.4;
    off.sizes[0] = std::max(off.sizes[0], 1.5);
    for (int i = 1; i < off.depth; ++i)
        off.sizes[i] = std::max(off.sizes[i], off.sizes[i - 1] * 1.5);
    auto away = stationarity_residual(off, p, cons);
    EXPECT_GE(away.residual_rel, 10.0 * res.stationarity.residual_rel);
}

TEST(Stationarity, SingleActiveConstraintYieldsPositiveMultiplier) {
    // Depth 1 with a binding area budget: one variable, one active
    // constraint, gradient parallel to the normal by construction.
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 3.0;
    auto best = optimize_depth(1, p, cons);
    ASSERT_TRUE(best.feasible);
    auto st = stationarity_residual(best.point, p, cons);
    bool has_area = false;
    for (std::size_t i = 0; i < st.active.size(); ++i) {
        if (st.active[i] == "area") {
            has_area = true;
            EXPECT_GT(st.multipliers[i], 0.0);
        }
    }
    EXPECT_TRUE(has_area);
    EXPECT_LT(st.residual_rel, 1e-3);
}

}  // namespace
