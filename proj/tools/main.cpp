#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cache3d/fitting.hpp"
#include "cache3d/oracle.hpp"
#include "cache3d/run_config.hpp"
#include "cache3d/svg.hpp"
#include "cache3d/sweep.hpp"
#include "json.hpp"

// cache3d: analytical 3D CMP cache-hierarchy modeling and optimization.
// Subcommands: fit, eval, optimize, sweep. Exit codes: 0 success,
// 1 usage/config error, 2 infeasible problem, 3 internal numerical failure.

namespace {

using namespace cache3d;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;

std::vector<double> split_doubles(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size())
            throw ConfigError(std::string(what) + ": malformed number '" + item + "'");
    }
    if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
    return out;
}

std::vector<int> split_ints(const std::string& csv, const char* what) {
    std::vector<int> out;
    for (double v : split_doubles(csv, what)) {
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError(std::string(what) + ": expected integers");
        out.push_back(i);
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

json fit_to_json(const FitResult& fit) {
    return json{{"coefficient", fit.coefficient},
                {"exponent", fit.exponent},
                {"max_rel_error", fit.max_rel_error},
                {"n_samples", fit.n_samples}};
}

int cmd_fit(const RunConfig& cfg, const std::string& samples_path,
            const std::string& kind) {
    std::ifstream in(samples_path);
    if (!in) throw ConfigError("cannot open samples file '" + samples_path + "'");
    auto samples = read_samples_csv(in, samples_path);

    json out_json;
    out_json["kind"] = kind;
    out_json["input"] = samples_path;
    if (kind == "time") {
        auto fits = fit_beta_per_layers(samples, cfg.params.tech.sigma);
        for (const auto& w : fits.warnings) std::cerr << "warning: " << w << "\n";

        std::vector<std::pair<double, double>> pooled;
        for (const auto& s : samples)
            pooled.emplace_back((s.size_bytes / cfg.params.tech.sigma) / s.layers,
                                s.value);
        auto all = fit_power_law(pooled);

        std::printf("access-time power-law fit, x = (S/sigma)/layers\n");
        std::printf("%8s %14s %12s %15s %9s\n", "layers", "coefficient",
                    "exponent", "max_rel_error", "samples");
        for (const auto& [layers, fit] : fits.per_layer)
            std::printf("%8d %14.6f %12.6f %15.6f %9d\n", layers, fit.coefficient,
                        fit.exponent, fit.max_rel_error, fit.n_samples);
        std::printf("pooled: tau = %.6f, beta = %.6f, max_rel_error = %.6f\n",
                    all.coefficient, all.exponent, all.max_rel_error);

        json per_layer;
        for (const auto& [layers, fit] : fits.per_layer)
            per_layer[std::to_string(layers)] = fit_to_json(fit);
        out_json["per_layer"] = per_layer;
        out_json["pooled"] = fit_to_json(all);
        out_json["pooled"]["tau"] = all.coefficient;
        out_json["pooled"]["beta"] = all.exponent;
        out_json["warnings"] = fits.warnings;
    } else {
        std::vector<std::pair<double, double>> xy;
        for (const auto& s : samples)
            xy.emplace_back(s.size_bytes / cfg.params.tech.sigma, s.value);
        auto fit = fit_power_law(xy);
        std::printf("area power-law fit, x = S/sigma\n");
        std::printf("alpha = %.6f, gamma = %.6f, max_rel_error = %.6f (%d samples)\n",
                    fit.coefficient, fit.exponent, fit.max_rel_error, fit.n_samples);
        out_json["alpha"] = fit.coefficient;
        out_json["gamma"] = fit.exponent;
        out_json["fit"] = fit_to_json(fit);
    }

    std::filesystem::create_directories(cfg.output_dir);
    auto path = std::filesystem::path(cfg.output_dir) / "fit_result.json";
    write_file(path, out_json.dump(2) + "\n");
    std::printf("wrote %s\n", path.string().c_str());
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, int depth, const std::string& sizes_csv,
             const std::string& partitions_csv) {
    auto sizes_bytes = split_doubles(sizes_csv, "--sizes");
    if (static_cast<int>(sizes_bytes.size()) != depth)
        throw ConfigError("--sizes must list exactly one value per level");
    std::vector<int> parts(static_cast<std::size_t>(depth), 1);
    if (!partitions_csv.empty()) {
        parts = split_ints(partitions_csv, "--partitions");
        if (static_cast<int>(parts.size()) != depth)
            throw ConfigError("--partitions must list exactly one value per level");
    }

    HierarchyConfig config;
    config.depth = depth;
    for (int i = 0; i < depth; ++i) {
        config.sizes[i] = sizes_bytes[static_cast<std::size_t>(i)] / cfg.params.tech.sigma;
        config.partitions[i] = {parts[static_cast<std::size_t>(i)], 1};
    }
    config.validate();

    EvalResult r;
    try {
        r = evaluate(config, cfg.params);
    } catch (const SaturationError& err) {
        std::printf("infeasible design point: %s\n", err.what());
        return kExitInfeasible;
    }

    std::printf("design point, depth %d\n", r.depth);
    for (int i = 0; i < r.depth; ++i)
        std::printf("  L%d: S = %.6g sigma (%.6g bytes), N = %d, t = %.6g, m = %.6g\n",
                    i + 1, config.sizes[i], config.sizes[i] * cfg.params.tech.sigma,
                    config.partitions[i].count(), r.access_times[i], r.miss_rates[i]);
    std::printf("  M_S = %.6g\n", r.shared_access_rate);
    std::printf("  d_NoC = %.6g (transfer %.6g, blocking+queuing %.6g)\n",
                r.noc_transfer + r.noc_queue, r.noc_transfer, r.noc_queue);
    std::printf("  avg delay D = %.9g\n", r.avg_delay);
    std::printf("  total power = %.6g, total area = %.6g\n", r.total_power,
                r.total_area);

    auto residual = [&](const char* name, double value,
                        const std::optional<double>& bound) {
        if (!bound) return;
        std::printf("  constraint %s: value %.6g, bound %.6g, margin %.6g (%s)\n",
                    name, value, *bound, *bound - value,
                    value <= *bound ? "ok" : "violated");
    };
    residual("area", r.total_area, cfg.constraints.a_max);
    residual("power", r.total_power, cfg.constraints.p_max);
    residual("noc", r.shared_access_rate, cfg.constraints.m_s_max);
    return kExitOk;
}

json result_to_json(const OptimizationResult& res) {
    json out;
    out["winner"] = {{"depth", res.winner_depth},
                     {"delay", res.winner_delay},
                     {"sizes_sigma", std::vector<double>(res.winner.sizes.begin(),
                                                         res.winner.sizes.begin() +
                                                             res.winner.depth)},
                     {"layers", std::vector<int>(res.winner.layers.begin(),
                                                 res.winner.layers.begin() +
                                                     res.winner.depth)},
                     {"m_s", res.winner_eval.shared_access_rate},
                     {"power", res.winner_eval.total_power},
                     {"area", res.winner_eval.total_area}};
    json per_depth = json::array();
    for (const auto& d : res.per_depth) {
        json j = {{"depth", d.depth}, {"feasible", d.feasible}};
        if (d.feasible) {
            j["delay"] = d.delay;
            j["sizes_sigma"] = std::vector<double>(
                d.point.sizes.begin(), d.point.sizes.begin() + d.depth);
            j["layers"] = std::vector<int>(d.point.layers.begin(),
                                           d.point.layers.begin() + d.depth);
        } else {
            j["violation"] = d.violation;
        }
        per_depth.push_back(j);
    }
    out["per_depth"] = per_depth;
    json binding = json::array();
    for (const auto& b : res.binding)
        binding.push_back({{"name", b.name},
                           {"value", b.value},
                           {"bound", b.bound},
                           {"rel_residual", b.rel_residual}});
    out["binding"] = binding;
    json st = {{"residual_rel", res.stationarity.residual_rel}};
    json multipliers;
    for (std::size_t i = 0; i < res.stationarity.active.size(); ++i)
        multipliers[res.stationarity.active[i]] = res.stationarity.multipliers[i];
    st["multipliers"] = multipliers;
    out["stationarity"] = st;
    return out;
}

int cmd_optimize(const RunConfig& cfg, bool verify) {
    OptimizerOptions opts;
    opts.seed = cfg.seed;
    opts.starts = cfg.starts;
    opts.threads = cfg.threads;

    OptimizationResult res;
    try {
        res = optimize(cfg.params, cfg.constraints, opts);
    } catch (const NoViableConfig& err) {
        std::printf("infeasible: %s\n", err.what());
        return kExitInfeasible;
    }

    for (const auto& d : res.per_depth) {
        if (d.feasible) {
            std::printf("depth %d: delay %.9g, sizes (sigma)", d.depth, d.delay);
            for (int i = 0; i < d.depth; ++i) std::printf(" %.6g", d.point.sizes[i]);
            std::printf(", layers");
            for (int i = 0; i < d.depth; ++i) std::printf(" %d", d.point.layers[i]);
            std::printf("\n");
        } else {
            std::printf("depth %d: infeasible (least total relative violation %.3g)\n",
                        d.depth, d.violation);
        }
    }
    std::printf("winner: depth %d, delay %.9g, M_S %.6g, power %.6g, area %.6g\n",
                res.winner_depth, res.winner_delay,
                res.winner_eval.shared_access_rate, res.winner_eval.total_power,
                res.winner_eval.total_area);
    for (const auto& b : res.binding)
        std::printf("binding: %s value %.9g bound %.9g rel_residual %.3g\n",
                    b.name.c_str(), b.value, b.bound, b.rel_residual);
    std::printf("stationarity residual (relative): %.3g\n",
                res.stationarity.residual_rel);
    for (std::size_t i = 0; i < res.stationarity.active.size(); ++i)
        std::printf("  lambda[%s] = %.6g\n", res.stationarity.active[i].c_str(),
                    res.stationarity.multipliers[i]);

    std::filesystem::create_directories(cfg.output_dir);
    auto path = std::filesystem::path(cfg.output_dir) / "optimize_result.json";
    write_file(path, result_to_json(res).dump(2) + "\n");
    std::printf("wrote %s\n", path.string().c_str());

    if (verify) {
        auto report = compare(res, cfg.params, cfg.constraints, cfg.oracle, 0,
                              cfg.threads);
        for (const auto& row : report.rows)
            std::printf("verify depth %d: optimizer %s oracle %s rel_gap %.5f %s\n",
                        row.depth,
                        row.opt_feasible ? std::to_string(row.opt_delay).c_str()
                                         : "infeasible",
                        row.oracle_feasible ? std::to_string(row.oracle_delay).c_str()
                                            : "infeasible",
                        row.rel_gap, row.flag ? "FLAG" : "ok");
        auto csv_path = std::filesystem::path(cfg.output_dir) / "verify_report.csv";
        write_file(csv_path, compare_csv(report.rows));
        std::printf("wrote %s\n", csv_path.string().c_str());
        if (report.flags > 0) {
            std::printf("verification failed: %d flagged row(s)\n", report.flags);
            return kExitInternal;
        }
        std::printf("verification clean: optimizer within 0.5%% of the oracle\n");
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
    auto rows = run_sweep(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    auto dir = std::filesystem::path(cfg.output_dir);
    write_file(dir / "sweep.csv", sweep_csv(rows));
    write_file(dir / "delay_vs_area.svg", chart_delay_vs_area(rows));
    write_file(dir / "area_fractions.svg", chart_area_fractions(rows));
    write_file(dir / "layer_allocation.svg",
               chart_layer_allocation(rows, cfg.constraints.total_layers));

    int feasible = 0;
    for (const auto& r : rows)
        if (r.winner_depth > 0) ++feasible;
    std::printf("sweep: %zu budget points, %d feasible\n", rows.size(), feasible);
    std::printf("winner depth per point:");
    for (const auto& r : rows) std::printf(" %d", r.winner_depth);
    std::printf("\n");
    std::printf("wrote %s, %s, %s, %s\n", (dir / "sweep.csv").string().c_str(),
                (dir / "delay_vs_area.svg").string().c_str(),
                (dir / "area_fractions.svg").string().c_str(),
                (dir / "layer_allocation.svg").string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytical 3D CMP cache-hierarchy optimization"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    bool verify = false;
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--out", out_dir, "output directory (default from config)");
    app.add_option("--seed", seed, "optimizer seed override")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--verify", verify, "cross-check optimizer against the oracle");

    auto* fit = app.add_subcommand("fit", "fit power laws to a sample table");
    std::string samples_path, kind;
    fit->add_option("samples", samples_path, "CSV with header size_bytes,layers,value")
        ->required();
    fit->add_option("--kind", kind, "time|area")
        ->required()
        ->check(CLI::IsMember({"time", "area"}));

    auto* eval = app.add_subcommand("eval", "evaluate an explicit design point");
    int depth = 1;
    std::string sizes_csv, partitions_csv;
    eval->add_option("--depth", depth, "hierarchy depth (1, 2 or 3)")
        ->required()
        ->check(CLI::Range(1, 3));
    eval->add_option("--sizes", sizes_csv, "per-level sizes in bytes, comma separated")
        ->required();
    eval->add_option("--partitions", partitions_csv,
                     "per-level 3D partition counts, comma separated");

    auto* optimize_cmd =
        app.add_subcommand("optimize", "optimize depth, sizes and partitioning");
    auto* sweep_cmd =
        app.add_subcommand("sweep", "sweep the area budget and emit CSV + charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg;
        if (config_path.empty()) {
            std::istringstream empty;
            cfg = parse_config_stream(empty, "<defaults>");
        } else {
            cfg = parse_config_file(config_path);
        }
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        for (const auto& line : cfg.provenance) std::cerr << "config: " << line << "\n";

        if (fit->parsed()) return cmd_fit(cfg, samples_path, kind);
        if (eval->parsed()) return cmd_eval(cfg, depth, sizes_csv, partitions_csv);
        if (optimize_cmd->parsed()) return cmd_optimize(cfg, verify);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NoViableConfig& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SaturationError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
