#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "medmax/errors.hpp"

namespace medmax {

using Index = std::uint32_t;

enum class MetricKind { euclidean, chebyshev, matrix };

// Regular lattice description. Point index is row-major with the first axis
// fastest: index = i0 + extent[0] * (i1 + extent[1] * ...).
struct GridShape {
  std::vector<int> extent;
  double spacing = 1.0;
  std::vector<double> origin;

  std::size_t count() const;
  std::vector<int> unflatten(Index i) const;
  Index flatten(std::span<const int> cell) const;
};

// Finite weighted metric measure space. Immutable after construction.
class Space {
 public:
  // Lattice with spacing h; every point carries the cell measure h^dim.
  static Space grid(std::vector<int> extent, double spacing,
                    MetricKind metric = MetricKind::euclidean,
                    std::vector<double> origin = {});
  static Space cloud(std::vector<std::vector<double>> coords, std::vector<double> weights,
                     MetricKind metric = MetricKind::euclidean);
  // Explicit symmetric distance matrix; the metric axioms are verified.
  static Space from_distances(std::vector<std::vector<double>> distances,
                              std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  int dim() const { return dim_; }
  MetricKind metric() const { return metric_; }
  const std::optional<GridShape>& grid_shape() const { return grid_; }
  bool is_grid() const { return grid_.has_value(); }

  double weight(Index i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> coords(Index i) const;
  const std::vector<std::vector<double>>& distance_matrix() const { return dist_; }

  double distance(Index a, Index b) const;
  double total_mass() const { return total_mass_; }
  // Smallest positive pairwise distance.
  double resolution() const { return resolution_; }
  double diameter() const { return diameter_; }

 private:
  Space() = default;
  void finish();

  int dim_ = 0;
  MetricKind metric_ = MetricKind::euclidean;
  std::vector<double> coords_;  // size() * dim_, empty for matrix metrics
  std::vector<double> weights_;
  std::vector<std::vector<double>> dist_;
  std::optional<GridShape> grid_;
  double total_mass_ = 0.0;
  double resolution_ = 0.0;
  double diameter_ = 0.0;
};

// Subset of a space's points stored as a sorted index list.
class MSet {
 public:
  MSet() = default;
  MSet(std::size_t universe, std::vector<Index> members);

  static MSet none(std::size_t universe) { return MSet(universe, {}); }
  static MSet all(std::size_t universe);
  static MSet from_mask(std::span<const char> mask);

  std::size_t universe() const { return universe_; }
  std::span<const Index> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(Index i) const;
  bool subset_of(const MSet& other) const;
  std::vector<char> mask() const;

  bool operator==(const MSet& other) const = default;

 private:
  std::size_t universe_ = 0;
  std::vector<Index> members_;
};

MSet set_union(const MSet& a, const MSet& b);
MSet set_intersection(const MSet& a, const MSet& b);
MSet set_difference(const MSet& a, const MSet& b);

// Real-valued function on a space's points; all values finite.
class Field {
 public:
  Field() = default;
  explicit Field(std::vector<double> values);
  static Field constant(std::size_t n, double c) { return Field(std::vector<double>(n, c)); }
  static Field indicator(const MSet& set);

  std::size_t size() const { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  Field abs() const;
  Field scaled(double c) const;
  Field shifted(double c) const;
  Field plus(const Field& other) const;

 private:
  std::vector<double> values_;
};

double measure(const Space& space, const MSet& set);

// Open ball {y : d(y, x) < r}.
MSet ball(const Space& space, Index center, double radius);

// {y : d(y, set) < rho}; rho = 0 gives the set itself.
MSet enlargement(const Space& space, const MSet& set, double rho);

// {x : |f(x)| > lambda}
MSet abs_superlevel(const Field& f, double lambda);
// {x : f(x) > lambda}
MSet superlevel(const Field& f, double lambda);

double lp_norm(const Space& space, const Field& f, double p);

// inf over lambda > 0 of lambda + mu({|f| > lambda}).
double l0_gauge(const Space& space, const Field& f);

// Point diameter of a set under the space metric.
double set_diameter(const Space& space, const MSet& set);

struct BallSample {
  Index center = 0;
  double radius = 0.0;
};

struct DoublingEstimate {
  double constant = 1.0;  // max mu(B(x,2r)) / mu(B(x,r))
  double exponent = 0.0;  // log2 of the constant
};

DoublingEstimate estimate_doubling(const Space& space, std::span<const BallSample> sample);

}  // namespace medmax
