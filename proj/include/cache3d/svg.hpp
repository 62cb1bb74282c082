#ifndef CACHE3D_SVG_HPP
#define CACHE3D_SVG_HPP

#include <string>
#include <vector>

#include "cache3d/sweep.hpp"

// Static SVG 1.1 charts rendered straight from sweep rows, no plotting
// library. Output is a pure function of the rows: byte-identical for
// identical sweeps.

namespace cache3d {

// Optimal average memory delay vs. area budget; winner depth color-coded,
// infeasible budgets appear as gaps.
std::string chart_delay_vs_area(const std::vector<SweepRow>& rows);

// Stacked per-level fractions of the used cache area.
std::string chart_area_fractions(const std::vector<SweepRow>& rows);

// Stacked per-level 3D layer allocation out of the total stack.
std::string chart_layer_allocation(const std::vector<SweepRow>& rows,
                                   int total_layers);

}  // namespace cache3d

#endif  // CACHE3D_SVG_HPP
