#include "medmax/median.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace medmax {

Gamma::Gamma(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) throw DomainError("gamma must lie in (0, 1)");
}

bool strictly_below(double s, double t) {
  return s < t && (t - s) > kTieTolerance * std::abs(t);
}

double weighted_median(std::span<const double> values, std::span<const double> weights,
                       double gamma) {
  if (values.size() != weights.size()) throw DomainError("values and weights differ in size");
  if (values.empty()) throw DomainError("median over an empty set");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  });
  double total = 0.0;
  for (std::size_t i : order) total += weights[i];
  if (!(total > 0.0)) throw DomainError("median over a set of zero measure");
  const double threshold = gamma * total;

  // Walk distinct values from the top; `above` is the weight strictly above
  // the current value. The qualifying values form an upper ray.
  double above = 0.0;
  double result = values[order.front()];
  std::size_t k = 0;
  while (k < order.size()) {
    const double v = values[order[k]];
    if (!strictly_below(above, threshold)) break;
    result = v;
    while (k < order.size() && values[order[k]] == v) above += weights[order[k++]];
  }
  return result;
}

double gamma_median_with(const MedianKernel& kernel, const Space& space, const Field& f,
                         const MSet& a, Gamma gamma) {
  if (f.size() != space.size() || a.universe() != space.size())
    throw DomainError("field or set does not belong to this space");
  if (a.empty()) throw DomainError("median over an empty set");
  std::vector<double> v, w;
  v.reserve(a.size());
  w.reserve(a.size());
  for (Index i : a.members()) {
    v.push_back(f[i]);
    w.push_back(space.weight(i));
  }
  return kernel(v, w, gamma.value());
}

double gamma_median(const Space& space, const Field& f, const MSet& a, Gamma gamma) {
  return gamma_median_with(weighted_median, space, f, a, gamma);
}

int indicator_median(double ratio, Gamma gamma) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw DomainError("ratio must lie in [0, 1]");
  return gamma.value() <= ratio ? 1 : 0;
}

std::vector<double> median_gamma_limit(const Space& space, const Field& f, const MSet& a,
                                       Gamma gamma, std::span<const double> eps) {
  std::vector<double> out;
  out.reserve(eps.size());
  double prev = std::numeric_limits<double>::infinity();
  for (double e : eps) {
    if (!(e > 0.0)) throw DomainError("eps must be positive");
    if (e >= gamma.value()) throw DomainError("eps must be smaller than gamma");
    if (e > prev) throw DomainError("eps sequence must be nonincreasing");
    prev = e;
    out.push_back(gamma_median(space, f, a, Gamma(gamma.value() - e)));
  }
  return out;
}

}  // namespace medmax
