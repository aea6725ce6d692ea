#pragma once

#include <functional>
#include <span>
#include <vector>

#include "medmax/space.hpp"

namespace medmax {

// Median level in the open interval (0, 1).
class Gamma {
 public:
  explicit Gamma(double value);
  double value() const { return value_; }

 private:
  double value_;
};

// Relative slack under which a cumulative weight counts as equal to the
// threshold gamma * mu(A).
inline constexpr double kTieTolerance = 0x1p-40;

// s < t, with near-equality (within kTieTolerance relative to t) treated as
// equality so that the threshold itself never qualifies.
bool strictly_below(double s, double t);

// inf{a : w({v > a}) < gamma * w(all)} over weighted samples. Returns one of
// the sample values. Weights must be positive.
double weighted_median(std::span<const double> values, std::span<const double> weights,
                       double gamma);

// Signature shared by weighted_median and any substitute implementation.
using MedianKernel =
    std::function<double(std::span<const double>, std::span<const double>, double)>;

double gamma_median(const Space& space, const Field& f, const MSet& a, Gamma gamma);

// Same, evaluated with an arbitrary kernel (used to exercise mutated rules).
double gamma_median_with(const MedianKernel& kernel, const Space& space, const Field& f,
                         const MSet& a, Gamma gamma);

// Median of an indicator over a set where the indicator has relative mass
// `ratio`: 1 when gamma <= ratio, 0 otherwise.
int indicator_median(double ratio, Gamma gamma);

// The sequence m^{gamma - eps_i}_f(A).
std::vector<double> median_gamma_limit(const Space& space, const Field& f, const MSet& a,
                                       Gamma gamma, std::span<const double> eps);

}  // namespace medmax
