#include "cache3d/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "cache3d/rng.hpp"

namespace cache3d {

namespace {

double sum_sq_residuals(const std::vector<std::pair<double, double>>& xy,
                        double c, double e) {
    double sse = 0.0;
    for (const auto& [x, y] : xy) {
        double r = (c * std::pow(x, e) - y) / y;
        sse += r * r;
    }
    return sse;
}

double max_relative_error(const std::vector<std::pair<double, double>>& xy,
                          double c, double e) {
    double worst = 0.0;
    for (const auto& [x, y] : xy)
        worst = std::max(worst, std::abs(c * std::pow(x, e) - y) / y);
    return worst;
}

}  // namespace

FitResult fit_power_law(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 3)
        throw FitError("fit_power_law: need at least 3 samples, got " +
                       std::to_string(xy.size()));
    for (const auto& [x, y] : xy)
        if (!(x > 0.0) || !(y > 0.0))
            throw FitError("fit_power_law: samples must have positive x and y");
    {
        double x0 = xy.front().first;
        bool distinct = false;
        for (const auto& [x, y] : xy)
            if (x != x0) distinct = true;
        if (!distinct)
            throw FitError("fit_power_law: need at least two distinct x values");
    }

    // Log-space linear regression seeds the iteration near the optimum.
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : xy) {
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : xy) {
        double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    double e = sxy / sxx;
    double c = std::exp(my - e * mx);

    // Damped Gauss-Newton on the relative residuals r_i = (c*x^e - y_i)/y_i.
    // Relative residuals keep the fit quality uniform across the size range,
    // matching the multiplicative error model of the timing tables.
    double sse = sum_sq_residuals(xy, c, e);
    for (int iter = 0; iter < 100; ++iter) {
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (const auto& [x, y] : xy) {
            double model = c * std::pow(x, e);
            double r = model / y - 1.0;
            double j0 = model / (c * y);            // d r / d c
            double j1 = model * std::log(x) / y;    // d r / d e
            jtj00 += j0 * j0;
            jtj01 += j0 * j1;
            jtj11 += j1 * j1;
            jtr0 += j0 * r;
            jtr1 += j1 * r;
        }
        double det = jtj00 * jtj11 - jtj01 * jtj01;
        if (!(std::abs(det) > 1e-300)) break;
        double dc = -(jtj11 * jtr0 - jtj01 * jtr1) / det;
        double de = -(jtj00 * jtr1 - jtj01 * jtr0) / det;

        double step = 1.0;
        double c_new = c, e_new = e, sse_new = sse;
        bool accepted = false;
        for (int halving = 0; halving < 25; ++halving) {
            c_new = c + step * dc;
            e_new = e + step * de;
            if (c_new > 0.0) {
                sse_new = sum_sq_residuals(xy, c_new, e_new);
                if (sse_new <= sse) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
        c = c_new;
        e = e_new;
        sse = sse_new;
        if (std::max(std::abs(step * dc), std::abs(step * de)) < 1e-10) break;
    }

    FitResult result;
    result.coefficient = c;
    result.exponent = e;
    result.max_rel_error = max_relative_error(xy, c, e);
    result.n_samples = static_cast<int>(xy.size());
    return result;
}

LayerFits fit_beta_per_layers(const std::vector<Sample>& samples, double sigma) {
    if (!(sigma > 0.0)) throw FitError("fit_beta_per_layers: sigma must be > 0");
    std::map<int, std::vector<std::pair<double, double>>> groups;
    for (const auto& s : samples) {
        if (s.layers < 1)
            throw FitError("fit_beta_per_layers: layer count must be >= 1");
        groups[s.layers].emplace_back((s.size_bytes / sigma) / s.layers, s.value);
    }
    for (const auto& [layers, xy] : groups)
        if (xy.size() < 3)
            throw FitError("fit_beta_per_layers: layer group " +
                           std::to_string(layers) + " has only " +
                           std::to_string(xy.size()) + " samples (need >= 3)");

    LayerFits out;
    for (const auto& [layers, xy] : groups) out.per_layer[layers] = fit_power_law(xy);

    const FitResult* prev = nullptr;
    int prev_layers = 0;
    for (const auto& [layers, fit] : out.per_layer) {
        if (prev && fit.exponent > prev->exponent + 1e-12) {
            std::ostringstream msg;
            msg << "fitted exponent increases with layer count: beta(" << layers
                << ") = " << fit.exponent << " > beta(" << prev_layers
                << ") = " << prev->exponent;
            out.warnings.push_back(msg.str());
        }
        prev = &fit;
        prev_layers = layers;
    }
    return out;
}

std::vector<Sample> generate_synthetic_samples(const TechnologyParams& tech,
                                               const std::vector<double>& sizes_bytes,
                                               const std::vector<int>& layer_counts,
                                               double noise_pct, uint64_t seed) {
    if (sizes_bytes.empty() || layer_counts.empty())
        throw DomainError("generate_synthetic_samples: empty size or layer grid");
    if (noise_pct < 0.0)
        throw DomainError("generate_synthetic_samples: noise_pct must be >= 0");
    for (double s : sizes_bytes)
        if (!(s > 0.0))
            throw DomainError("generate_synthetic_samples: sizes must be > 0");

    SplitMix64 rng(seed);
    std::vector<Sample> out;
    out.reserve(sizes_bytes.size() * layer_counts.size());
    for (int layers : layer_counts) {
        if (layers < 1)
            throw DomainError("generate_synthetic_samples: layer counts must be >= 1");
        for (double size : sizes_bytes) {
            double noise = 1.0 + noise_pct * (2.0 * rng.uniform01() - 1.0);
            double value =
                access_time_private(size / tech.sigma, layers, 1, tech) * noise;
            out.push_back({size, layers, value});
        }
    }
    return out;
}

std::vector<double> default_size_grid_bytes() {
    std::vector<double> sizes;
    for (double s = 4.0 * 1024.0; s <= 16.0 * 1024.0 * 1024.0; s *= 2.0)
        sizes.push_back(s);
    return sizes;  // 4 KB .. 16 MB, 13 doublings
}

std::vector<Sample> read_samples_csv(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line))
        throw FitError(name + ": empty sample file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "size_bytes,layers,value")
        throw FitError(name + ":1: expected header 'size_bytes,layers,value', got '" +
                       line + "'");

    std::vector<Sample> samples;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string f1, f2, f3;
        if (!std::getline(row, f1, ',') || !std::getline(row, f2, ',') ||
            !std::getline(row, f3))
            throw FitError(name + ":" + std::to_string(lineno) +
                           ": expected 3 comma-separated fields");
        try {
            std::size_t used = 0;
            Sample s;
            s.size_bytes = std::stod(f1, &used);
            if (used != f1.size()) throw std::invalid_argument(f1);
            s.layers = std::stoi(f2, &used);
            if (used != f2.size()) throw std::invalid_argument(f2);
            s.value = std::stod(f3, &used);
            if (used != f3.size()) throw std::invalid_argument(f3);
            if (!(s.size_bytes > 0.0) || s.layers < 1 || !(s.value > 0.0))
                throw FitError(name + ":" + std::to_string(lineno) +
                               ": sample fields must be positive");
            samples.push_back(s);
        } catch (const FitError&) {
            throw;
        } catch (const std::exception&) {
            throw FitError(name + ":" + std::to_string(lineno) +
                           ": malformed numeric field in '" + line + "'");
        }
    }
    return samples;
}

}  // namespace cache3d
