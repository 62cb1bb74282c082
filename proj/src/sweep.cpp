#include "cache3d/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cache3d {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
    std::vector<SweepRow> rows;
    OptimizerOptions opts;
    opts.seed = cfg.seed;
    opts.starts = cfg.starts;
    opts.threads = cfg.threads;

    for (double budget : sweep_budgets(cfg.sweep)) {
        ConstraintSet cons = cfg.constraints;
        cons.a_max = budget;

        SweepRow row;
        row.area_budget = budget;
        try {
            OptimizationResult res = optimize(cfg.params, cons, opts);
            row.winner_depth = res.winner_depth;
            row.delay = res.winner_delay;
            row.power_used = res.winner_eval.total_power;
            row.m_s = res.winner_eval.shared_access_rate;
            double area = res.winner_eval.total_area;
            for (int i = 0; i < res.winner.depth; ++i) {
                row.sizes[i] = res.winner.sizes[i];
                row.layers[i] = res.winner.layers[i];
                row.area_frac[i] = cfg.params.tech.alpha *
                                   std::pow(res.winner.sizes[i], cfg.params.tech.gamma) /
                                   area;
            }
            for (const auto& b : res.binding) {
                if (b.name == "layers") continue;
                if (!row.binding.empty()) row.binding += ";";
                row.binding += b.name;
            }
            if (row.binding.empty()) row.binding = "-";
            // Carry the per-depth optima forward as warm starts.
            opts.hints.clear();
            for (const auto& d : res.per_depth)
                if (d.feasible) opts.hints.push_back(d.point);
        } catch (const NoViableConfig&) {
            row.binding = "infeasible";
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "area_budget,winner_depth,delay,s1,s2,s3,n1,n2,n3,"
           "frac1,frac2,frac3,power,m_s,binding\n";
    for (const auto& r : rows) {
        out << fmt(r.area_budget) << ',' << r.winner_depth << ',';
        if (r.delay) out << fmt(*r.delay);
        for (int i = 0; i < 3; ++i) {
            out << ',';
            if (r.winner_depth >= i + 1) out << fmt(r.sizes[i]);
        }
        for (int i = 0; i < 3; ++i) {
            out << ',';
            if (r.winner_depth >= i + 1) out << r.layers[i];
        }
        for (int i = 0; i < 3; ++i) {
            out << ',';
            if (r.winner_depth >= i + 1) out << fmt(r.area_frac[i]);
        }
        out << ',';
        if (r.power_used) out << fmt(*r.power_used);
        out << ',';
        if (r.m_s) out << fmt(*r.m_s);
        out << ',' << r.binding << '\n';
    }
    return out.str();
}

}  // namespace cache3d
