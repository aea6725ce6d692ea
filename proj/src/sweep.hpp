#pragma once

// Exhaustive lattice sweeps over every box of a box family whose diameter
// lies in a window. Internal to the library.

#include <optional>
#include <span>
#include <vector>

#include "medmax/basis.hpp"

namespace medmax::detail {

struct SweepField {
  std::vector<double> hi;  // per point: max over boxes containing it
  std::vector<double> lo;  // per point: min over boxes containing it (if requested)
};

// Box statistic is the gamma-median of `values` when gamma is set, the mean
// otherwise. Points covered by no box get -inf / +inf.
SweepField sweep_boxes(const Basis& basis, std::span<const double> values,
                       std::optional<double> gamma, Window w, bool want_lo);

// Points covered by a box B with #(B n E) not strictly below gamma * #B.
std::vector<char> sweep_superlevel(const Basis& basis, std::span<const char> in_e, double gamma,
                                   Window w);

}  // namespace medmax::detail
