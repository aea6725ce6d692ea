#include "medmax/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace medmax {

std::size_t GridShape::count() const {
  std::size_t n = 1;
  for (int e : extent) n *= static_cast<std::size_t>(e);
  return n;
}

std::vector<int> GridShape::unflatten(Index i) const {
  std::vector<int> cell(extent.size());
  for (std::size_t a = 0; a < extent.size(); ++a) {
    cell[a] = static_cast<int>(i % static_cast<Index>(extent[a]));
    i /= static_cast<Index>(extent[a]);
  }
  return cell;
}

Index GridShape::flatten(std::span<const int> cell) const {
  Index i = 0;
  for (std::size_t a = extent.size(); a-- > 0;) i = i * static_cast<Index>(extent[a]) + cell[a];
  return i;
}

Space Space::grid(std::vector<int> extent, double spacing, MetricKind metric,
                  std::vector<double> origin) {
  if (extent.empty()) throw DomainError("grid needs at least one axis");
  for (int e : extent)
    if (e < 1) throw DomainError("grid extents must be positive");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw DomainError("grid spacing must be > 0");
  if (metric == MetricKind::matrix) throw DomainError("grids use coordinate metrics");
  if (origin.empty()) origin.assign(extent.size(), 0.0);
  if (origin.size() != extent.size()) throw DomainError("origin dimension mismatch");

  Space s;
  s.dim_ = static_cast<int>(extent.size());
  s.metric_ = metric;
  s.grid_ = GridShape{extent, spacing, origin};
  const std::size_t n = s.grid_->count();
  s.coords_.resize(n * s.dim_);
  for (Index i = 0; i < n; ++i) {
    auto cell = s.grid_->unflatten(i);
    for (int a = 0; a < s.dim_; ++a) s.coords_[i * s.dim_ + a] = origin[a] + cell[a] * spacing;
  }
  s.weights_.assign(n, std::pow(spacing, s.dim_));
  s.total_mass_ = std::accumulate(s.weights_.begin(), s.weights_.end(), 0.0);
  s.resolution_ = n > 1 ? spacing : 0.0;
  double sq = 0.0, mx = 0.0;
  for (int e : extent) {
    const double len = (e - 1) * spacing;
    sq += len * len;
    mx = std::max(mx, len);
  }
  s.diameter_ = metric == MetricKind::euclidean ? std::sqrt(sq) : mx;
  return s;
}

Space Space::cloud(std::vector<std::vector<double>> coords, std::vector<double> weights,
                   MetricKind metric) {
  if (coords.empty()) throw DomainError("point cloud is empty");
  if (coords.size() != weights.size()) throw DomainError("one weight per point required");
  if (metric == MetricKind::matrix) throw DomainError("clouds use coordinate metrics");
  Space s;
  s.dim_ = static_cast<int>(coords.front().size());
  if (s.dim_ < 1) throw DomainError("coordinates need dimension >= 1");
  s.metric_ = metric;
  for (const auto& c : coords) {
    if (static_cast<int>(c.size()) != s.dim_) throw DomainError("ragged coordinates");
    for (double v : c)
      if (!std::isfinite(v)) throw DomainError("coordinates must be finite");
    s.coords_.insert(s.coords_.end(), c.begin(), c.end());
  }
  s.weights_ = std::move(weights);
  s.finish();
  return s;
}

Space Space::from_distances(std::vector<std::vector<double>> distances,
                            std::vector<double> weights) {
  const std::size_t n = distances.size();
  if (n == 0) throw DomainError("distance matrix is empty");
  if (weights.size() != n) throw DomainError("one weight per point required");
  for (const auto& row : distances)
    if (row.size() != n) throw DomainError("distance matrix must be square");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i][i] != 0.0) throw DomainError("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distances[i][j];
      if (!std::isfinite(d) || d < 0.0) throw DomainError("distances must be finite and >= 0");
      if (d != distances[j][i]) throw DomainError("distance matrix must be symmetric");
      if (i != j && d == 0.0) throw DomainError("distinct points need positive distance");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double lhs = distances[i][k];
        const double rhs = distances[i][j] + distances[j][k];
        if (lhs > rhs * (1.0 + 1e-12))
          throw DomainError("triangle inequality fails at (" + std::to_string(i) + "," +
                            std::to_string(j) + "," + std::to_string(k) + ")");
      }
  Space s;
  s.dim_ = 1;
  s.metric_ = MetricKind::matrix;
  s.dist_ = std::move(distances);
  s.weights_ = std::move(weights);
  s.finish();
  return s;
}

void Space::finish() {
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("weights must be positive and finite");
  total_mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  double res = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  const Index n = static_cast<Index>(size());
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = distance(i, j);
      if (d == 0.0) throw DomainError("duplicate points are not allowed");
      res = std::min(res, d);
      diam = std::max(diam, d);
    }
  resolution_ = n > 1 ? res : 0.0;
  diameter_ = diam;
}

std::span<const double> Space::coords(Index i) const {
  if (coords_.empty()) return {};
  return std::span<const double>(coords_).subspan(static_cast<std::size_t>(i) * dim_, dim_);
}

double Space::distance(Index a, Index b) const {
  if (metric_ == MetricKind::matrix) return dist_[a][b];
  const double* pa = coords_.data() + static_cast<std::size_t>(a) * dim_;
  const double* pb = coords_.data() + static_cast<std::size_t>(b) * dim_;
  if (metric_ == MetricKind::chebyshev) {
    double m = 0.0;
    for (int k = 0; k < dim_; ++k) m = std::max(m, std::abs(pa[k] - pb[k]));
    return m;
  }
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) {
    const double t = pa[k] - pb[k];
    s += t * t;
  }
  return std::sqrt(s);
}

MSet::MSet(std::size_t universe, std::vector<Index> members)
    : universe_(universe), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= universe_)
    throw DomainError("set member outside its space");
}

MSet MSet::all(std::size_t universe) {
  std::vector<Index> m(universe);
  std::iota(m.begin(), m.end(), Index{0});
  return MSet(universe, std::move(m));
}

MSet MSet::from_mask(std::span<const char> mask) {
  std::vector<Index> m;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) m.push_back(static_cast<Index>(i));
  MSet s;
  s.universe_ = mask.size();
  s.members_ = std::move(m);
  return s;
}

bool MSet::contains(Index i) const {
  return std::binary_search(members_.begin(), members_.end(), i);
}

bool MSet::subset_of(const MSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                       members_.end());
}

std::vector<char> MSet::mask() const {
  std::vector<char> m(universe_, 0);
  for (Index i : members_) m[i] = 1;
  return m;
}

namespace {
void check_same_universe(const MSet& a, const MSet& b) {
  if (a.universe() != b.universe()) throw DomainError("sets live on different spaces");
}
}  // namespace

MSet set_union(const MSet& a, const MSet& b) {
  check_same_universe(a, b);
  std::vector<Index> out;
  std::set_union(a.members().begin(), a.members().end(), b.members().begin(), b.members().end(),
                 std::back_inserter(out));
  return MSet(a.universe(), std::move(out));
}

MSet set_intersection(const MSet& a, const MSet& b) {
  check_same_universe(a, b);
  std::vector<Index> out;
  std::set_intersection(a.members().begin(), a.members().end(), b.members().begin(),
                        b.members().end(), std::back_inserter(out));
  return MSet(a.universe(), std::move(out));
}

MSet set_difference(const MSet& a, const MSet& b) {
  check_same_universe(a, b);
  std::vector<Index> out;
  std::set_difference(a.members().begin(), a.members().end(), b.members().begin(),
                      b.members().end(), std::back_inserter(out));
  return MSet(a.universe(), std::move(out));
}

Field::Field(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("field values must be finite");
}

Field Field::indicator(const MSet& set) {
  std::vector<double> v(set.universe(), 0.0);
  for (Index i : set.members()) v[i] = 1.0;
  return Field(std::move(v));
}

Field Field::abs() const {
  std::vector<double> v(values_);
  for (double& x : v) x = std::abs(x);
  return Field(std::move(v));
}

Field Field::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return Field(std::move(v));
}

Field Field::shifted(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x += c;
  return Field(std::move(v));
}

Field Field::plus(const Field& other) const {
  if (other.size() != size()) throw DomainError("field sizes differ");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  return Field(std::move(v));
}

double measure(const Space& space, const MSet& set) {
  if (set.universe() != space.size()) throw DomainError("set does not belong to this space");
  double m = 0.0;
  for (Index i : set.members()) m += space.weight(i);
  return m;
}

MSet ball(const Space& space, Index center, double radius) {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  if (center >= space.size()) throw DomainError("ball center outside the space");
  std::vector<Index> m;
  const Index n = static_cast<Index>(space.size());
  for (Index y = 0; y < n; ++y)
    if (space.distance(center, y) < radius) m.push_back(y);
  return MSet(space.size(), std::move(m));
}

MSet enlargement(const Space& space, const MSet& set, double rho) {
  if (rho <= 0.0 || set.empty()) return set;
  std::vector<Index> m;
  const Index n = static_cast<Index>(space.size());
  for (Index y = 0; y < n; ++y) {
    for (Index e : set.members())
      if (space.distance(e, y) < rho) {
        m.push_back(y);
        break;
      }
  }
  return MSet(space.size(), std::move(m));
}

MSet abs_superlevel(const Field& f, double lambda) {
  std::vector<Index> m;
  for (Index i = 0; i < f.size(); ++i)
    if (std::abs(f[i]) > lambda) m.push_back(i);
  return MSet(f.size(), std::move(m));
}

MSet superlevel(const Field& f, double lambda) {
  std::vector<Index> m;
  for (Index i = 0; i < f.size(); ++i)
    if (f[i] > lambda) m.push_back(i);
  return MSet(f.size(), std::move(m));
}

double lp_norm(const Space& space, const Field& f, double p) {
  if (!(p > 0.0)) throw DomainError("lp_norm needs p > 0");
  if (f.size() != space.size()) throw DomainError("field does not belong to this space");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    if (a > 0.0) s += std::pow(a, p) * space.weight(i);
  }
  return std::pow(s, 1.0 / p);
}

double l0_gauge(const Space& space, const Field& f) {
  if (f.size() != space.size()) throw DomainError("field does not belong to this space");
  // lambda + mu(|f| > lambda) is piecewise linear with upward slope between the
  // data values, so the infimum sits at lambda -> 0+ or at a data value.
  std::vector<std::pair<double, double>> vw;
  vw.reserve(f.size());
  for (Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    if (a > 0.0) vw.emplace_back(a, space.weight(i));
  }
  std::sort(vw.begin(), vw.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  double tail = 0.0;  // mu(|f| > current value)
  double best = 0.0;
  for (const auto& [v, w] : vw) best += w;  // lambda -> 0+
  std::size_t k = 0;
  while (k < vw.size()) {
    const double v = vw[k].first;
    best = std::min(best, v + tail);
    while (k < vw.size() && vw[k].first == v) tail += vw[k++].second;
  }
  return best;
}

double set_diameter(const Space& space, const MSet& set) {
  double d = 0.0;
  auto m = set.members();
  for (std::size_t a = 0; a < m.size(); ++a)
    for (std::size_t b = a + 1; b < m.size(); ++b) d = std::max(d, space.distance(m[a], m[b]));
  return d;
}

DoublingEstimate estimate_doubling(const Space& space, std::span<const BallSample> sample) {
  if (sample.empty()) throw DomainError("doubling estimate needs a nonempty sample");
  DoublingEstimate est;
  est.constant = 1.0;
  for (const auto& s : sample) {
    const double inner = measure(space, ball(space, s.center, s.radius));
    const double outer = measure(space, ball(space, s.center, 2.0 * s.radius));
    est.constant = std::max(est.constant, outer / inner);
  }
  est.exponent = std::log2(est.constant);
  return est;
}

}  // namespace medmax
