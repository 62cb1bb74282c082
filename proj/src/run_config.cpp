#include "cache3d/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cache3d {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& value, const std::string& ctx) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& value, const std::string& ctx) {
    try {
        std::size_t used = 0;
        int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": expected an integer, got '" + value + "'");
    }
}

uint64_t parse_u64(const std::string& value, const std::string& ctx) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return static_cast<uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": expected a non-negative integer, got '" + value +
                          "'");
    }
}

// "1:0.50,2:0.49,..." -> beta table.
std::map<int, double> parse_beta_table(const std::string& value,
                                       const std::string& ctx) {
    std::map<int, double> table;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError(ctx + ": expected layers:beta pairs, got '" + item +
                              "'");
        int layers = parse_int(trim(item.substr(0, colon)), ctx);
        double beta = parse_double(trim(item.substr(colon + 1)), ctx);
        table[layers] = beta;
    }
    if (table.empty()) throw ConfigError(ctx + ": empty beta table");
    return table;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

RunConfig default_run_config() {
    RunConfig cfg;  // aggregate defaults in the headers are the profile
    return cfg;
}

void RunConfig::validate() const {
    try {
        params.validate();
        constraints.validate();
        oracle.validate();
    } catch (const DomainError& err) {
        throw ConfigError(err.what());
    }
    if (!(sweep.budget_min > 0.0) || !(sweep.budget_max > sweep.budget_min))
        throw ConfigError(
            "sweep.budget_min/budget_max must be positive and increasing");
    if (sweep.points < 2) throw ConfigError("sweep.points must be >= 2");
    if (starts < 1) throw ConfigError("optimizer.starts must be >= 1");
    if (threads < 0) throw ConfigError("optimizer.threads must be >= 0");
    if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

RunConfig parse_config_stream(std::istream& in, const std::string& name) {
    RunConfig cfg = default_run_config();
    std::map<std::string, std::string> overridden;
    std::vector<std::string> unknown;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(lineno) +
                              ": expected 'section.key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string ctx = name + ":" + std::to_string(lineno) + ": " + key;
        if (key.empty() || value.empty())
            throw ConfigError(ctx + ": empty key or value");

        auto& tech = cfg.params.tech;
        auto& wl = cfg.params.workload;
        auto& noc = cfg.params.noc;
        if (key == "technology.sigma_bytes") tech.sigma = parse_double(value, ctx);
        else if (key == "technology.tau") tech.tau = parse_double(value, ctx);
        else if (key == "technology.mu") tech.mu = parse_double(value, ctx);
        else if (key == "technology.rho") tech.rho = parse_double(value, ctx);
        else if (key == "technology.alpha") tech.alpha = parse_double(value, ctx);
        else if (key == "technology.gamma") tech.gamma = parse_double(value, ctx);
        else if (key == "technology.d_dram") tech.d_dram = parse_double(value, ctx);
        else if (key == "technology.beta_table")
            tech.beta_table = parse_beta_table(value, ctx);
        else if (key == "workload.n_cores") wl.n_cores = parse_int(value, ctx);
        else if (key == "workload.e_n") wl.e_n = parse_double(value, ctx);
        else if (key == "workload.mu_n") wl.mu_n = parse_double(value, ctx);
        else if (key == "noc.c_transfer") noc.c_transfer = parse_double(value, ctx);
        else if (key == "noc.k_queue") noc.k_queue = parse_double(value, ctx);
        else if (key == "noc.m_saturation")
            noc.m_saturation = parse_double(value, ctx);
        else if (key == "constraints.a_max")
            cfg.constraints.a_max = parse_double(value, ctx);
        else if (key == "constraints.p_max")
            cfg.constraints.p_max = parse_double(value, ctx);
        else if (key == "constraints.m_s_max")
            cfg.constraints.m_s_max = parse_double(value, ctx);
        else if (key == "constraints.total_layers")
            cfg.constraints.total_layers = parse_int(value, ctx);
        else if (key == "sweep.budget_min")
            cfg.sweep.budget_min = parse_double(value, ctx);
        else if (key == "sweep.budget_max")
            cfg.sweep.budget_max = parse_double(value, ctx);
        else if (key == "sweep.points") cfg.sweep.points = parse_int(value, ctx);
        else if (key == "sweep.spacing") {
            if (value == "log") cfg.sweep.log_spacing = true;
            else if (value == "linear") cfg.sweep.log_spacing = false;
            else throw ConfigError(ctx + ": expected 'log' or 'linear'");
        } else if (key == "optimizer.seed") cfg.seed = parse_u64(value, ctx);
        else if (key == "optimizer.starts") cfg.starts = parse_int(value, ctx);
        else if (key == "optimizer.threads") cfg.threads = parse_int(value, ctx);
        else if (key == "oracle.size_points")
            cfg.oracle.size_points = parse_int(value, ctx);
        else if (key == "oracle.refinement_rounds")
            cfg.oracle.refinement_rounds = parse_int(value, ctx);
        else if (key == "output.dir") cfg.output_dir = value;
        else {
            unknown.push_back(key);
            continue;
        }
        overridden[key] = value;
    }

    if (!unknown.empty()) {
        std::string joined;
        for (const auto& k : unknown) {
            if (!joined.empty()) joined += ", ";
            joined += k;
        }
        throw ConfigError(name + ": unknown configuration keys: " + joined);
    }

    // Provenance: config overrides, then "paper default" for the two
    // technology-survey constants, "profile default" for everything else.
    auto tag = [&](const std::string& key, const std::string& value,
                   const char* default_kind) {
        auto it = overridden.find(key);
        if (it != overridden.end())
            cfg.provenance.push_back(key + " = " + it->second + " [from config]");
        else
            cfg.provenance.push_back(key + " = " + value + " [" + default_kind + "]");
    };
    const auto& t = cfg.params.tech;
    const auto& w = cfg.params.workload;
    const auto& n = cfg.params.noc;
    tag("technology.sigma_bytes", format_value(t.sigma), "profile default");
    tag("technology.tau", format_value(t.tau), "profile default");
    tag("technology.mu", format_value(t.mu), "profile default");
    tag("technology.rho", format_value(t.rho), "profile default");
    tag("technology.alpha", format_value(t.alpha), "paper default");
    tag("technology.gamma", format_value(t.gamma), "paper default");
    tag("technology.d_dram", format_value(t.d_dram), "profile default");
    {
        std::string table;
        for (const auto& [layers, beta] : t.beta_table) {
            if (!table.empty()) table += ",";
            table += std::to_string(layers) + ":" + format_value(beta);
        }
        tag("technology.beta_table", table, "profile default");
    }
    tag("workload.n_cores", std::to_string(w.n_cores), "profile default");
    tag("workload.e_n", format_value(w.e_n), "profile default");
    tag("workload.mu_n", format_value(w.mu_n), "profile default");
    tag("noc.c_transfer", format_value(n.c_transfer), "profile default");
    tag("noc.k_queue", format_value(n.k_queue), "profile default");
    tag("noc.m_saturation", format_value(n.m_saturation), "profile default");
    auto tag_opt = [&](const std::string& key, const std::optional<double>& v) {
        if (overridden.count(key))
            cfg.provenance.push_back(key + " = " + overridden.at(key) +
                                     " [from config]");
        else
            cfg.provenance.push_back(key + " unset (unconstrained) [profile default]");
        (void)v;
    };
    tag_opt("constraints.a_max", cfg.constraints.a_max);
    tag_opt("constraints.p_max", cfg.constraints.p_max);
    tag_opt("constraints.m_s_max", cfg.constraints.m_s_max);
    tag("constraints.total_layers", std::to_string(cfg.constraints.total_layers),
        "profile default");
    tag("optimizer.seed", std::to_string(cfg.seed), "profile default");
    tag("optimizer.starts", std::to_string(cfg.starts), "profile default");
    tag("optimizer.threads", std::to_string(cfg.threads), "profile default");

    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config_stream(in, path);
}

std::vector<double> sweep_budgets(const SweepSpec& sweep) {
    std::vector<double> budgets(static_cast<std::size_t>(sweep.points));
    for (int i = 0; i < sweep.points; ++i) {
        double f = static_cast<double>(i) / (sweep.points - 1);
        budgets[static_cast<std::size_t>(i)] =
            sweep.log_spacing
                ? sweep.budget_min *
                      std::pow(sweep.budget_max / sweep.budget_min, f)
                : sweep.budget_min + (sweep.budget_max - sweep.budget_min) * f;
    }
    return budgets;
}

}  // namespace cache3d
