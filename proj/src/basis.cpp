#include "medmax/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "medmax/util.hpp"

namespace medmax {

namespace {

constexpr std::size_t kBallPointCap = 4096;

std::vector<int> full_ladder(int n) {
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = i + 1;
  return out;
}

// 1..7 followed by m * 2^j for m in 4..7; closed under doubling.
std::vector<int> geometric_ladder(int n) {
  std::vector<int> out;
  for (int i = 1; i <= std::min(7, n); ++i) out.push_back(i);
  for (int j = 1;; ++j) {
    bool any = false;
    for (int m = 4; m <= 7; ++m) {
      const long long v = static_cast<long long>(m) << j;
      if (v <= n) {
        out.push_back(static_cast<int>(v));
        any = true;
      }
    }
    if (!any) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> dyadic_ladder(int n) {
  std::vector<int> out;
  for (int v = 1; v <= n; v *= 2) out.push_back(v);
  return out;
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::balls: return "balls";
    case BasisKind::cubes: return "cubes";
    case BasisKind::axis_rects: return "axis_rects";
    case BasisKind::rotated_rects: return "rotated_rects";
    case BasisKind::dyadic_cubes: return "dyadic_cubes";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(std::string_view name) {
  if (name == "balls") return BasisKind::balls;
  if (name == "cubes" || name == "intervals1d" || name == "intervals") return BasisKind::cubes;
  if (name == "axis_rects") return BasisKind::axis_rects;
  if (name == "rotated_rects") return BasisKind::rotated_rects;
  if (name == "dyadic_cubes") return BasisKind::dyadic_cubes;
  throw DomainError("unknown basis family: " + std::string(name));
}

namespace {
BasisFamily of_kind(BasisKind kind) {
  BasisFamily f;
  f.kind = kind;
  return f;
}
}  // namespace

BasisFamily BasisFamily::balls() { return of_kind(BasisKind::balls); }
BasisFamily BasisFamily::cubes() { return of_kind(BasisKind::cubes); }
BasisFamily BasisFamily::axis_rects(double eccentricity) {
  BasisFamily f = of_kind(BasisKind::axis_rects);
  f.eccentricity = eccentricity;
  return f;
}
BasisFamily BasisFamily::rotated_rects(int angles, double eccentricity) {
  BasisFamily f = of_kind(BasisKind::rotated_rects);
  f.angles = angles;
  f.eccentricity = eccentricity;
  return f;
}
BasisFamily BasisFamily::dyadic_cubes() { return of_kind(BasisKind::dyadic_cubes); }

std::vector<double> dyadic_scales(int k_min, int k_max) {
  if (k_min > k_max) throw DomainError("empty scale range");
  std::vector<double> out;
  for (int k = k_min; k <= k_max; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

std::string family_to_json(const BasisFamily& family) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(family.kind);
  j["eccentricity"] = family.eccentricity;
  j["angles"] = family.angles;
  j["scale_grid"] = family.scale_grid;
  j["seed"] = family.seed;
  return j.dump();
}

BasisFamily family_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("family descriptor is not JSON: ") + e.what());
  }
  if (!j.contains("kind")) throw DomainError("family descriptor needs a kind");
  BasisFamily f;
  f.kind = basis_kind_from_string(j.at("kind").get<std::string>());
  if (f.kind == BasisKind::rotated_rects) f.eccentricity = 32.0;
  f.eccentricity = j.value("eccentricity", f.eccentricity);
  f.angles = j.value("angles", f.angles);
  f.scale_grid = j.value("scale_grid", std::vector<double>{});
  f.seed = j.value("seed", std::uint64_t{0});
  return f;
}

Basis::Basis(const Space& space, BasisFamily family) : space_(&space), family_(std::move(family)) {
  if (!(family_.eccentricity >= 1.0)) throw DomainError("eccentricity must be >= 1");
  if (family_.angles < 1) throw DomainError("need at least one angle");
  for (std::size_t i = 1; i < family_.scale_grid.size(); ++i)
    if (!(family_.scale_grid[i] < family_.scale_grid[i - 1]))
      throw DomainError("scale grid must be strictly decreasing");
  if (family_.kind == BasisKind::balls) {
    if (space.size() > kBallPointCap)
      throw SizeCapExceeded("balls family is limited to " + std::to_string(kBallPointCap) +
                            " points");
    radii_.resize(space.size());
    for (Index c = 0; c < space.size(); ++c) {
      auto& r = radii_[c];
      r.reserve(space.size());
      for (Index y = 0; y < space.size(); ++y) r.push_back(space.distance(c, y));
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    return;
  }
  if (!space.is_grid()) throw DomainError("box families need a grid space");
  if (space.dim() > 2) throw DomainError("box families are implemented for 1D and 2D grids");
  if (space.dim() == 1 && family_.kind == BasisKind::rotated_rects)
    throw DomainError("rotated rectangles need a 2D grid");
  build_frames();
}

void Basis::build_frames() {
  const auto& g = *space_->grid_shape();
  const int n0 = g.extent[0];
  const Index n = static_cast<Index>(space_->size());

  auto finish = [&](Frame& fr, const std::vector<int>& cu, const std::vector<int>& cv) {
    const auto [umn, umx] = std::minmax_element(cu.begin(), cu.end());
    const auto [vmn, vmx] = std::minmax_element(cv.begin(), cv.end());
    fr.umin = *umn;
    fr.vmin = *vmn;
    fr.nu = *umx - *umn + 1;
    fr.nv = *vmx - *vmn + 1;
    fr.u_of.resize(n);
    fr.v_of.resize(n);
    fr.cell_of.resize(n);
    std::vector<Index> counts(static_cast<std::size_t>(fr.nu) * fr.nv + 1, 0);
    for (Index i = 0; i < n; ++i) {
      fr.u_of[i] = cu[i] - fr.umin;
      fr.v_of[i] = cv[i] - fr.vmin;
      fr.cell_of[i] = fr.cell(fr.u_of[i], fr.v_of[i]);
      ++counts[fr.cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < counts.size(); ++c) counts[c] += counts[c - 1];
    fr.cell_start = counts;
    fr.cell_points.resize(n);
    for (Index i = 0; i < n; ++i) fr.cell_points[counts[fr.cell_of[i]]++] = i;
  };

  std::vector<int> cu(n), cv(n);
  if (family_.kind != BasisKind::rotated_rects) {
    Frame fr;
    for (Index i = 0; i < n; ++i) {
      cu[i] = static_cast<int>(i % n0);
      cv[i] = static_cast<int>(i / n0);
    }
    finish(fr, cu, cv);
    frames_.push_back(std::move(fr));
  } else {
    for (int k = 0; k < family_.angles; ++k) {
      Frame fr;
      fr.angle = std::numbers::pi * k / family_.angles;
      fr.axis = false;
      fr.cos_a = std::cos(fr.angle);
      fr.sin_a = std::sin(fr.angle);
      const double c = fr.cos_a, s = fr.sin_a;
      for (Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i % n0), y = static_cast<double>(i / n0);
        cu[i] = static_cast<int>(std::floor(x * c + y * s + 0.5));
        cv[i] = static_cast<int>(std::floor(-x * s + y * c + 0.5));
      }
      finish(fr, cu, cv);
      frames_.push_back(std::move(fr));
    }
  }
  int longest = 0;
  for (const auto& fr : frames_) longest = std::max({longest, fr.nu, fr.nv});
  switch (family_.kind) {
    case BasisKind::rotated_rects: lengths_ = geometric_ladder(longest); break;
    case BasisKind::dyadic_cubes: lengths_ = dyadic_ladder(longest); break;
    default: lengths_ = full_ladder(longest); break;
  }
}

std::vector<Shape> Basis::shapes(Window w) const {
  std::vector<Shape> out;
  if (!family_.is_box()) return out;
  const double h = space_->grid_shape()->spacing;
  const bool one_d = space_->dim() == 1;
  const bool cheb = space_->metric() == MetricKind::chebyshev;
  auto axis_diam = [&](int lu, int lv) {
    const double a = lu - 1, b = lv - 1;
    return cheb ? h * std::max(a, b) : h * std::sqrt(a * a + b * b);
  };
  for (std::size_t f = 0; f < frames_.size(); ++f) {
    const Frame& fr = frames_[f];
    for (int lu : lengths_) {
      if (lu > fr.nu) break;
      if (one_d) {
        const double d = axis_diam(lu, 1);
        if (d >= w.lo && d < w.hi) out.push_back({static_cast<int>(f), lu, 1, d});
        continue;
      }
      for (int lv : lengths_) {
        if (lv > fr.nv) break;
        const double ecc = static_cast<double>(std::max(lu, lv)) / std::min(lu, lv);
        double d = 0.0;
        switch (family_.kind) {
          case BasisKind::cubes:
          case BasisKind::dyadic_cubes:
            if (lu != lv) continue;
            d = axis_diam(lu, lv);
            break;
          case BasisKind::axis_rects:
            if (ecc > family_.eccentricity) continue;
            d = axis_diam(lu, lv);
            break;
          case BasisKind::rotated_rects:
            if (lu < lv || ecc > family_.eccentricity) continue;
            d = h * std::sqrt(static_cast<double>(lu) * lu + static_cast<double>(lv) * lv);
            break;
          case BasisKind::balls: break;
        }
        if (d >= w.lo && d < w.hi) out.push_back({static_cast<int>(f), lu, lv, d});
      }
    }
  }
  return out;
}

bool Basis::valid_box(int frame, int u0, int v0, int lu, int lv) const {
  const Frame& fr = frames_[frame];
  if (fr.axis) {
    if (u0 < 0 || v0 < 0 || u0 + lu > fr.nu || v0 + lv > fr.nv) return false;
    if (dyadic() && (u0 % lu != 0 || v0 % lv != 0)) return false;
    return true;
  }
  const auto& g = *space_->grid_shape();
  const double xmax = g.extent[0] - 0.5, ymax = g.extent[1] - 0.5;
  const double c = fr.cos_a, s = fr.sin_a;
  const double ua = fr.umin + u0 - 0.5, ub = ua + lu;
  const double va = fr.vmin + v0 - 0.5, vb = va + lv;
  constexpr double tol = 1e-9;
  for (double u : {ua, ub})
    for (double v : {va, vb}) {
      const double x = u * c - v * s, y = u * s + v * c;
      if (x < -0.5 - tol || x > xmax + tol || y < -0.5 - tol || y > ymax + tol) return false;
    }
  return true;
}

double Basis::ball_diameter(Index center, double radius) const {
  if (std::isinf(radius)) return space_->diameter();
  return set_diameter(*space_, ball(*space_, center, radius));
}

double Basis::diameter(const Member& m) const {
  if (m.is_ball()) return ball_diameter(m.center, m.radius);
  const double h = space_->grid_shape()->spacing;
  if (!frames_[m.frame].axis)
    return h * std::sqrt(static_cast<double>(m.lu) * m.lu + static_cast<double>(m.lv) * m.lv);
  const double a = m.lu - 1, b = m.lv - 1;
  if (space_->metric() == MetricKind::chebyshev) return h * std::max(a, b);
  return h * std::sqrt(a * a + b * b);
}

bool Basis::contains(const Member& m, Index x) const {
  if (m.is_ball()) return space_->distance(m.center, x) < m.radius;
  const Frame& fr = frames_[m.frame];
  const int u = fr.u_of[x], v = fr.v_of[x];
  return u >= m.u0 && u < m.u0 + m.lu && v >= m.v0 && v < m.v0 + m.lv;
}

MSet Basis::rasterize(const Member& m) const {
  if (m.is_ball()) {
    if (std::isinf(m.radius)) return MSet::all(space_->size());
    return ball(*space_, m.center, m.radius);
  }
  const Frame& fr = frames_[m.frame];
  std::vector<Index> pts;
  for (int v = m.v0; v < m.v0 + m.lv; ++v)
    for (int u = m.u0; u < m.u0 + m.lu; ++u)
      for (Index p : fr.points_in(fr.cell(u, v))) pts.push_back(p);
  return MSet(space_->size(), std::move(pts));
}

void Basis::check_window(Window w) const {
  if (!(w.hi > space_->resolution()))
    throw ResolutionExhausted("scale " + std::to_string(w.hi) +
                              " does not exceed the space resolution " +
                              std::to_string(space_->resolution()));
  if (!family_.scale_grid.empty()) {
    const double top = family_.scale_grid.front();
    if (w.hi > top * (1.0 + 1e-12) && !std::isinf(top))
      throw DomainError("window exceeds the family's scale grid");
  }
}

std::vector<Member> Basis::members_at(Index x, Window w, std::size_t cap) const {
  std::vector<Member> out;
  if (x >= space_->size()) throw DomainError("point outside the space");
  if (family_.kind == BasisKind::balls) {
    for (Index c = 0; c < space_->size(); ++c) {
      const double dcx = space_->distance(c, x);
      if (!(dcx < w.hi)) continue;
      const auto& r = radii_[c];
      auto k = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), dcx) - r.begin());
      for (; k < r.size(); ++k) {
        const double reach = r[k];
        if (reach >= w.hi) break;
        const double radius =
            k + 1 < r.size() ? r[k + 1] : std::numeric_limits<double>::infinity();
        if (2.0 * reach < w.lo) continue;
        if (!(reach >= w.lo && 2.0 * reach < w.hi)) {
          const double d = ball_diameter(c, radius);
          if (d >= w.hi) break;
          if (d < w.lo) continue;
        }
        Member m;
        m.center = c;
        m.radius = radius;
        out.push_back(m);
        if (out.size() > cap) return out;
      }
    }
    return out;
  }
  for (const Shape& s : shapes(w)) {
    const Frame& fr = frames_[s.frame];
    const int u = fr.u_of[x], v = fr.v_of[x];
    if (dyadic()) {
      const int u0 = (u / s.lu) * s.lu, v0 = (v / s.lv) * s.lv;
      if (valid_box(s.frame, u0, v0, s.lu, s.lv)) {
        out.push_back(Member{s.frame, u0, v0, s.lu, s.lv});
        if (out.size() > cap) return out;
      }
      continue;
    }
    for (int v0 = v - s.lv + 1; v0 <= v; ++v0)
      for (int u0 = u - s.lu + 1; u0 <= u; ++u0)
        if (valid_box(s.frame, u0, v0, s.lu, s.lv)) {
          out.push_back(Member{s.frame, u0, v0, s.lu, s.lv});
          if (out.size() > cap) return out;
        }
  }
  return out;
}

std::size_t Basis::count_at(Index x, Window w) const { return members_at(x, w).size(); }

Member Basis::canonical(Index x, Window w) const {
  if (w.lo == 0.0) {
    if (family_.kind == BasisKind::balls) {
      const auto& r = radii_[x];
      const double half = w.hi / 2.0;
      const auto k = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), half) -
                                              r.begin());  // first r[k] >= half
      Member m;
      m.center = x;
      m.radius = k < r.size() ? r[k] : std::numeric_limits<double>::infinity();
      return m;
    }
    const Frame& fr = frames_[0];
    Member m{0, fr.u_of[x], fr.v_of[x], 1, 1};
    if (diameter(m) < w.hi) return m;
  }
  auto ms = members_at(x, w, 0);
  if (ms.empty()) throw ResolutionExhausted("no basis set fits the window at this point");
  return ms.front();
}

std::vector<Member> Basis::sample_boxes(Index x, Window w, std::size_t budget) const {
  std::vector<Member> out{canonical(x, w)};
  std::set<std::tuple<int, int, int, int, int>> seen;
  auto key = [](const Member& m) { return std::make_tuple(m.frame, m.u0, m.v0, m.lu, m.lv); };
  seen.insert(key(out.front()));
  const auto sh = shapes(w);
  std::vector<double> weight;
  for (const auto& s : sh) weight.push_back(dyadic() ? 1.0 : static_cast<double>(s.lu) * s.lv);
  std::mt19937_64 rng(mix_seed(family_.seed, x));
  std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
  const std::size_t attempts = 64 * budget;
  for (std::size_t t = 0; t < attempts && out.size() < budget; ++t) {
    const Shape& s = sh[pick(rng)];
    const Frame& fr = frames_[s.frame];
    int u0, v0;
    if (dyadic()) {
      u0 = (fr.u_of[x] / s.lu) * s.lu;
      v0 = (fr.v_of[x] / s.lv) * s.lv;
    } else {
      u0 = fr.u_of[x] - static_cast<int>(rng() % static_cast<unsigned>(s.lu));
      v0 = fr.v_of[x] - static_cast<int>(rng() % static_cast<unsigned>(s.lv));
    }
    if (!valid_box(s.frame, u0, v0, s.lu, s.lv)) continue;
    Member m{s.frame, u0, v0, s.lu, s.lv};
    if (seen.insert(key(m)).second) out.push_back(m);
  }
  return out;
}

std::vector<Member> Basis::sample_at(Index x, Window w, std::size_t budget) const {
  if (budget < 1) throw DomainError("budget must be >= 1");
  check_window(w);
  auto all = members_at(x, w, budget);
  if (all.empty()) throw ResolutionExhausted("no basis set fits the window at this point");
  if (all.size() <= budget) return all;
  if (family_.is_box()) return sample_boxes(x, w, budget);

  all = members_at(x, w);
  const Member head = canonical(x, w);
  std::vector<Member> rest;
  for (const auto& m : all)
    if (!(m == head)) rest.push_back(m);
  std::vector<Member> out{head};
  std::mt19937_64 rng(mix_seed(family_.seed, x));
  std::sample(rest.begin(), rest.end(), std::back_inserter(out), budget - 1, rng);
  return out;
}

std::vector<MSet> Basis::sets_at(Index x, double eps, std::size_t budget) const {
  std::vector<MSet> out;
  for (const auto& m : sample_at(x, Window{0.0, eps}, budget)) {
    MSet s = rasterize(m);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

Member Basis::homothety(const Member& m, double scale, std::span<const int> shift) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");
  if (m.is_ball()) {
    Member out = m;
    out.radius = m.radius * scale;
    if (!shift.empty()) {
      if (!space_->is_grid()) throw DomainError("lattice shifts need a grid space");
      const auto& g = *space_->grid_shape();
      if (shift.size() != g.extent.size()) throw DomainError("shift dimension mismatch");
      auto cell = g.unflatten(m.center);
      for (std::size_t a = 0; a < cell.size(); ++a) {
        cell[a] += shift[a];
        if (cell[a] < 0 || cell[a] >= g.extent[a]) throw OutOfDomain("ball center leaves the grid");
      }
      out.center = g.flatten(cell);
    }
    return out;
  }
  const Frame& fr = frames_[m.frame];
  const int su = shift.size() > 0 ? shift[0] : 0;
  const int sv = shift.size() > 1 ? shift[1] : 0;
  Member out = m;
  out.lu = static_cast<int>(std::lround(scale * m.lu));
  out.lv = space_->dim() == 1 ? 1 : static_cast<int>(std::lround(scale * m.lv));
  out.u0 = static_cast<int>(std::lround(scale * (fr.umin + m.u0))) + su - fr.umin;
  out.v0 = space_->dim() == 1 ? 0
                              : static_cast<int>(std::lround(scale * (fr.vmin + m.v0))) + sv -
                                    fr.vmin;
  if (out.lu < 1 || out.lv < 1) throw OutOfDomain("image box is degenerate");
  if (!valid_box(out.frame, out.u0, out.v0, out.lu, out.lv))
    throw OutOfDomain("image box leaves the grid");
  return out;
}

namespace {

struct SetIndex {
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;

  static std::uint64_t hash(const MSet& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (Index i : s.members()) h = (h ^ i) * 1099511628211ULL;
    return h ^ s.size();
  }

  std::uint32_t insert(std::vector<MSet>& sets, MSet s) {
    auto& b = buckets[hash(s)];
    for (std::uint32_t id : b)
      if (sets[id] == s) return id;
    sets.push_back(std::move(s));
    b.push_back(static_cast<std::uint32_t>(sets.size() - 1));
    return b.back();
  }
};

}  // namespace

SetCollection enumerate_collection(const Basis& basis, Window w, std::size_t budget) {
  const Space& space = basis.space();
  SetCollection out;
  out.at.resize(space.size());
  SetIndex index;
  for (Index x = 0; x < space.size(); ++x) {
    for (const auto& m : basis.sample_at(x, w, budget)) {
      MSet s = basis.rasterize(m);
      if (s.empty()) continue;
      out.at[x].push_back(index.insert(out.sets, std::move(s)));
    }
    auto& a = out.at[x];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return out;
}

SetCollection countable_refinement(const Space& space, const SetCollection& base) {
  SetCollection out;
  out.at.resize(space.size());
  SetIndex index;
  const Index n = static_cast<Index>(space.size());
  for (const MSet& b : base.sets) {
    const auto inside = b.mask();
    struct Sub {
      MSet set;
      double mass;
      Index center;
    };
    std::vector<Sub> subs;
    for (Index y : b.members()) {
      double r = std::numeric_limits<double>::infinity();
      for (Index z = 0; z < n; ++z)
        if (!inside[z]) r = std::min(r, space.distance(y, z));
      MSet s = std::isinf(r) ? MSet::all(n) : ball(space, y, r);
      const double m = measure(space, s);
      subs.push_back({std::move(s), m, y});
    }
    std::stable_sort(subs.begin(), subs.end(), [](const Sub& a, const Sub& c) {
      return a.mass > c.mass || (a.mass == c.mass && a.center < c.center);
    });
    const double half = 0.5 * measure(space, b);
    MSet acc(n, {});
    for (const Sub& s : subs) {
      if (s.set.subset_of(acc)) continue;
      acc = set_union(acc, s.set);
      if (measure(space, acc) >= half) index.insert(out.sets, acc);
    }
  }
  for (std::uint32_t id = 0; id < out.sets.size(); ++id)
    for (Index x : out.sets[id].members()) out.at[x].push_back(id);
  return out;
}

}  // namespace medmax
