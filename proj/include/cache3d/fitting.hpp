#ifndef CACHE3D_FITTING_HPP
#define CACHE3D_FITTING_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cache3d/models.hpp"

// Nonlinear least-squares fitting of the two power laws used by the models:
// access time (coefficient tau, exponent beta) and silicon area (alpha,
// gamma), plus a synthetic-table generator standing in for circuit-level
// timing data.

namespace cache3d {

struct Sample {
    double size_bytes = 0.0;
    int layers = 1;
    double value = 0.0;
};

struct FitResult {
    double coefficient = 0.0;
    double exponent = 0.0;
    double max_rel_error = 0.0;
    int n_samples = 0;
};

// Fits y = c * x^e by minimizing the sum of squared relative residuals
// ((c*x^e - y)/y): a log-space linear regression seeds a damped Gauss-Newton
// refinement (max 100 iterations, stop when the step infinity-norm drops
// below 1e-10). Requires >= 3 samples with positive coordinates and at least
// two distinct x values; throws FitError otherwise.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& xy);

struct LayerFits {
    std::map<int, FitResult> per_layer;
    std::vector<std::string> warnings;  // e.g. exponent not non-increasing
};

// Groups samples by layer count and fits each group with x = (size/sigma) /
// layers. Emits a warning (not an error) when the recovered exponents are
// not non-increasing in the layer count.
LayerFits fit_beta_per_layers(const std::vector<Sample>& samples, double sigma);

// Deterministic synthetic access-time tables: values follow the private
// access-time power law with multiplicative noise uniform in
// [1 - noise_pct, 1 + noise_pct] (noise_pct is a fraction: 0.02 = 2%).
std::vector<Sample> generate_synthetic_samples(const TechnologyParams& tech,
                                               const std::vector<double>& sizes_bytes,
                                               const std::vector<int>& layer_counts,
                                               double noise_pct, uint64_t seed);

// Geometric size grid over the validated range 4 KB .. 16 MB (doublings).
std::vector<double> default_size_grid_bytes();

// Reads `size_bytes,layers,value` CSV (exact header). Throws FitError with a
// line number on malformed input.
std::vector<Sample> read_samples_csv(std::istream& in, const std::string& name);

}  // namespace cache3d

#endif  // CACHE3D_FITTING_HPP
