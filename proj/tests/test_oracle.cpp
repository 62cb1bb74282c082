#include "cache3d/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cache3d/rng.hpp"

using namespace cache3d;

namespace {

TEST(GridSearch, DepthOneMatchesDirectEnumeration) {
    ModelParams p;
    ConstraintSet cons;
    GridSpec grid;
    grid.size_points = 2048;
    grid.refinement_rounds = 0;
    auto best = grid_search(1, p, cons, grid);
    ASSERT_TRUE(best.feasible);

    // Direct enumeration of the same grid in the test.
    double best_direct = std::numeric_limits<double>::infinity();
    double best_size = 0.0;
    int best_n = 0;
    for (int i = 0; i < grid.size_points; ++i) {
        double s = std::exp(std::log(kSizeMax) * i / (grid.size_points - 1.0));
        for (int n = 1; n <= cons.total_layers; ++n) {
            HierarchyConfig cfg;
            cfg.depth = 1;
            cfg.sizes[0] = s;
            cfg.partitions[0] = {n, 1};
            double d = evaluate(cfg, p).avg_delay;
            if (d < best_direct) {
                best_direct = d;
                best_size = s;
                best_n = n;
            }
        }
    }
    EXPECT_NEAR(best.delay / best_direct, 1.0, 1e-12);
    EXPECT_NEAR(best.point.sizes[0] / best_size, 1.0, 1e-12);
    EXPECT_EQ(best.point.layers[0], best_n);

    // Local-minimum property: both grid neighbors of the winner are no
    // better (immediate from the enumeration agreement above).
    double h = std::log(kSizeMax) / (grid.size_points - 1.0);
    for (double dir : {-1.0, 1.0}) {
        HierarchyConfig cfg;
        cfg.depth = 1;
        cfg.sizes[0] = best_size * std::exp(dir * h);
        cfg.partitions[0] = {best_n, 1};
        EXPECT_GE(evaluate(cfg, p).avg_delay, best.delay);
    }
}

TEST(GridSearch, RefinementSelfConsistency) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 80.0;
    GridSpec coarse;
    coarse.size_points = 256;
    coarse.refinement_rounds = 2;
    GridSpec fine;
    fine.size_points = 2048;
    fine.refinement_rounds = 2;
    auto a = grid_search(2, p, cons, coarse);
    auto b = grid_search(2, p, cons, fine);
    ASSERT_TRUE(a.feasible);
    ASSERT_TRUE(b.feasible);
    EXPECT_NEAR(a.delay / b.delay, 1.0, 0.002);
}

TEST(GridSearch, RefinementMonotone) {
    ModelParams p;
    ConstraintSet cons;
    cons.p_max = 10.0;
    GridSpec grid;
    grid.size_points = 32;
    grid.refinement_rounds = 4;
    auto best = grid_search(3, p, cons, grid);
    ASSERT_TRUE(best.feasible);
    ASSERT_EQ(best.round_delays.size(), 5u);
    for (std::size_t i = 1; i < best.round_delays.size(); ++i)
        EXPECT_LE(best.round_delays[i], best.round_delays[i - 1]);
}

TEST(GridSearch, ReturnedPointSatisfiesConstraintsExactly) {
    ModelParams p;
    SplitMix64 rng(404);
    GridSpec grid;
    grid.size_points = 24;
    grid.refinement_rounds = 1;
    for (int trial = 0; trial < 5; ++trial) {
        ConstraintSet cons;
        cons.a_max = rng.log_uniform(5.0, 5e4);
        cons.p_max = rng.log_uniform(3.0, 100.0);
        for (int depth = 1; depth <= 3; ++depth) {
            auto best = grid_search(depth, p, cons, grid);
            if (!best.feasible) continue;
            auto ev = evaluate(best.point.to_config(), p);
            EXPECT_LE(ev.total_area, *cons.a_max);
            EXPECT_LE(ev.total_power, *cons.p_max);
            int layers = 0;
            for (int i = 0; i < depth; ++i) layers += best.point.layers[i];
            EXPECT_LE(layers, cons.total_layers);
        }
    }
}

TEST(GridSearch, FactoredAssignmentEqualsExhaustive) {
    ModelParams p;
    ConstraintSet cons;
    cons.total_layers = 6;
    cons.a_max = 2e4;
    GridSpec factored;
    factored.size_points = 8;
    factored.refinement_rounds = 0;
    GridSpec exhaustive = factored;
    exhaustive.exhaustive_assignments = true;
    for (int depth = 1; depth <= 3; ++depth) {
        auto a = grid_search(depth, p, cons, factored);
        auto b = grid_search(depth, p, cons, exhaustive);
        ASSERT_EQ(a.feasible, b.feasible);
        if (!a.feasible) continue;
        EXPECT_NEAR(a.delay / b.delay, 1.0, 1e-12);
        for (int i = 0; i < depth; ++i) {
            EXPECT_DOUBLE_EQ(a.point.sizes[i], b.point.sizes[i]);
            EXPECT_EQ(a.point.layers[i], b.point.layers[i]);
        }
    }
}

TEST(GridSearch, MinimumGridMatchesHandEnumeration) {
    // Smallest legal grid, hand enumeration of every ordered tuple and
    // every assignment through the public evaluation path.
    ModelParams p;
    ConstraintSet cons;
    cons.total_layers = 4;
    GridSpec grid;
    grid.size_points = 8;
    grid.refinement_rounds = 0;

    std::vector<double> axis;
    for (int i = 0; i < grid.size_points; ++i)
        axis.push_back(std::exp(std::log(kSizeMax) * i / (grid.size_points - 1.0)));

    double best_direct = std::numeric_limits<double>::infinity();
    for (double s1 : axis)
        for (double s2 : axis) {
            if (!(s2 > s1)) continue;
            for (int n1 = 1; n1 <= 3; ++n1)
                for (int n2 = 1; n2 + n1 <= 4; ++n2) {
                    HierarchyConfig cfg;
                    cfg.depth = 2;
                    cfg.sizes = {s1, s2, 0.0};
                    cfg.partitions[0] = {n1, 1};
                    cfg.partitions[1] = {n2, 1};
                    best_direct = std::min(best_direct, evaluate(cfg, p).avg_delay);
                }
        }
    auto best = grid_search(2, p, cons, grid);
    ASSERT_TRUE(best.feasible);
    EXPECT_NEAR(best.delay / best_direct, 1.0, 1e-12);
}

TEST(GridSearch, PartitionsCanBeExcluded) {
    ModelParams p;
    ConstraintSet cons;
    GridSpec grid;
    grid.size_points = 32;
    grid.refinement_rounds = 0;
    grid.include_partitions = false;
    auto best = grid_search(2, p, cons, grid);
    ASSERT_TRUE(best.feasible);
    EXPECT_EQ(best.point.layers[0], 1);
    EXPECT_EQ(best.point.layers[1], 1);

    grid.include_partitions = true;
    auto with = grid_search(2, p, cons, grid);
    EXPECT_LE(with.delay, best.delay);  // partitioning only helps
}

TEST(GridSearch, InfeasibleSetReportsLeastViolation) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 0.2;  // below the single-level floor
    GridSpec grid;
    grid.size_points = 16;
    grid.refinement_rounds = 1;
    auto best = grid_search(1, p, cons, grid);
    EXPECT_FALSE(best.feasible);
    EXPECT_GT(best.violation, 0.0);
    EXPECT_LT(best.violation, 1e3);
}

TEST(Compare, CleanInstanceHasNoFlags) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 50.0;
    auto opt = optimize(p, cons);
    GridSpec grid;
    auto report = compare(opt, p, cons, grid, 7);
    EXPECT_EQ(report.flags, 0);
    ASSERT_EQ(report.rows.size(), 3u);
    for (const auto& row : report.rows) {
        EXPECT_EQ(row.instance_id, 7);
        EXPECT_LE(row.rel_gap, 0.005);
    }
}

TEST(Compare, DetectsFeasibilityDisagreements) {
    ModelParams p;
    ConstraintSet cons;
    cons.a_max = 50.0;
    auto opt = optimize(p, cons);
    GridSpec grid;

    // Optimizer claiming infeasible where the oracle finds a point.
    auto doctored = opt;
    doctored.per_depth[1].feasible = false;
    auto report = compare(doctored, p, cons, grid);
    EXPECT_GE(report.flags, 1);

    // Optimizer claiming a feasible point that does not verify.
    auto lying = opt;
    lying.per_depth[0].point.sizes[0] = 5e5;  // area far beyond the budget
    lying.per_depth[0].delay = 0.001;
    auto report2 = compare(lying, p, cons, grid);
    bool flagged_depth1 = false;
    for (const auto& row : report2.rows)
        if (row.depth == 1 && row.flag) flagged_depth1 = true;
    EXPECT_TRUE(flagged_depth1);
}

TEST(Compare, DeterministicReport) {
    ModelParams p;
    ConstraintSet cons;
    cons.p_max = 8.0;
    auto opt = optimize(p, cons);
    GridSpec grid;
    auto a = compare(opt, p, cons, grid, 3);
    auto b = compare(opt, p, cons, grid, 3);
    EXPECT_EQ(compare_csv(a.rows), compare_csv(b.rows));
}

TEST(Compare, CsvSchema) {
    CompareRow row;
    row.instance_id = 1;
    row.depth = 2;
    row.opt_feasible = true;
    row.opt_delay = 1.25;
    row.oracle_feasible = false;
    row.rel_gap = 0.0;
    auto csv = compare_csv({row});
    EXPECT_EQ(csv,
              "instance_id,depth,opt_delay,oracle_delay,rel_gap,flag\n"
              "1,2,1.25,inf,0,0\n");
}

TEST(SeededInstances, DeterministicAndInRange) {
    ModelParams p;
    GridSpec grid;
    grid.size_points = 24;
    grid.refinement_rounds = 1;
    auto a = seeded_instances(p, 8, 555, grid);
    auto b = seeded_instances(p, 8, 555, grid);
    ASSERT_EQ(a.size(), 8u);
    int constrained = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].a_max.has_value(), b[i].a_max.has_value());
        if (a[i].a_max) {
            EXPECT_EQ(*a[i].a_max, *b[i].a_max);
            ++constrained;
        }
        if (a[i].p_max) {
            EXPECT_EQ(*a[i].p_max, *b[i].p_max);
        }
        if (a[i].m_s_max) {
            EXPECT_EQ(*a[i].m_s_max, *b[i].m_s_max);
        }
    }
    EXPECT_GE(constrained, 2);
}

}  // namespace
