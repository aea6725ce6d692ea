#include "medmax/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "medmax/util.hpp"
#include "sweep.hpp"

namespace medmax {

namespace {

bool use_sweep(const Basis& basis, const MaximalOptions& opt) {
  switch (opt.engine) {
    case Engine::per_point: return false;
    case Engine::sweep:
      if (!basis.family().is_box()) throw DomainError("the sweep engine needs a box family");
      return true;
    case Engine::automatic: return basis.family().is_box();
  }
  return false;
}

Provenance make_provenance(const Basis& basis, std::string op, std::optional<double> gamma,
                           const MaximalOptions& opt, bool sweep) {
  Provenance p;
  p.op = std::move(op);
  p.gamma = gamma;
  p.family = basis.family();
  p.window = opt.window;
  p.budget = opt.budget;
  p.engine = sweep ? "sweep" : "per_point";
  return p;
}

void check_field(const Basis& basis, const Field& f) {
  if (f.size() != basis.space().size()) throw DomainError("field does not belong to the space");
}

// The sweep marks points no box reaches; with a valid window every point has
// at least one box, so this only guards the per-window contract.
void require_covered(std::span<const double> v) {
  for (double x : v)
    if (std::isinf(x)) throw ResolutionExhausted("no basis set fits the window at some point");
}

double weighted_average(const Space& space, const Field& f, const MSet& s) {
  double num = 0.0, den = 0.0;
  for (Index i : s.members()) {
    num += std::abs(f[i]) * space.weight(i);
    den += space.weight(i);
  }
  return num / den;
}

double set_median(const Space& space, std::span<const double> values, const MSet& s,
                  double gamma) {
  std::vector<double> v, w;
  v.reserve(s.size());
  w.reserve(s.size());
  for (Index i : s.members()) {
    v.push_back(values[i]);
    w.push_back(space.weight(i));
  }
  return weighted_median(v, w, gamma);
}

// Pointwise max and min of a per-set statistic over the per-point selection.
template <class Stat>
std::pair<std::vector<double>, std::vector<double>> per_point(const Basis& basis,
                                                              const MaximalOptions& opt,
                                                              Stat&& stat) {
  const Space& space = basis.space();
  std::vector<double> hi(space.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> lo(space.size(), std::numeric_limits<double>::infinity());
  for (Index x = 0; x < space.size(); ++x)
    for (const Member& m : basis.sample_at(x, opt.window, opt.budget)) {
      const MSet s = basis.rasterize(m);
      if (s.empty()) continue;
      const double v = stat(s);
      hi[x] = std::max(hi[x], v);
      lo[x] = std::min(lo[x], v);
    }
  return {hi, lo};
}

std::vector<double> abs_values(const Field& f) {
  std::vector<double> a(f.size());
  for (Index i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
  return a;
}

void check_window_resolves(const Basis& basis, Window w) {
  if (!(w.hi > basis.space().resolution()))
    throw ResolutionExhausted("scale does not exceed the space resolution");
}

}  // namespace

std::string provenance_json(const Provenance& p) {
  nlohmann::ordered_json j;
  j["op"] = p.op;
  if (p.gamma) j["gamma"] = *p.gamma;
  j["family"] = nlohmann::json::parse(family_to_json(p.family));
  j["window"] = {{"lo", p.window.lo},
                 {"hi", std::isinf(p.window.hi) ? nlohmann::json("inf") : nlohmann::json(p.window.hi)}};
  j["budget"] = p.budget;
  j["seed"] = p.family.seed;
  j["engine"] = p.engine;
  j["version"] = kVersion;
  return j.dump();
}

void write_maximal_csv(std::ostream& out, const Space& space, const MaximalField& field) {
  out << "# " << provenance_json(field.provenance) << "\n";
  out << "index";
  for (int a = 0; a < space.dim(); ++a) out << ",x" << a;
  out << ",value\n";
  for (Index i = 0; i < space.size(); ++i) {
    out << i;
    for (double c : space.coords(i)) out << "," << format_double(c);
    out << "," << format_double(field.values[i]) << "\n";
  }
}

MaximalField median_maximal(const Basis& basis, const Field& f, Gamma gamma,
                            const MaximalOptions& opt) {
  check_field(basis, f);
  check_window_resolves(basis, opt.window);
  const bool sweep = use_sweep(basis, opt);
  const auto a = abs_values(f);
  std::vector<double> hi;
  if (sweep) {
    hi = detail::sweep_boxes(basis, a, gamma.value(), opt.window, false).hi;
  } else {
    hi = per_point(basis, opt, [&](const MSet& s) {
           return set_median(basis.space(), a, s, gamma.value());
         }).first;
  }
  require_covered(hi);
  return {Field(std::move(hi)), make_provenance(basis, "median", gamma.value(), opt, sweep)};
}

MaximalField avg_maximal(const Basis& basis, const Field& f, const MaximalOptions& opt) {
  check_field(basis, f);
  check_window_resolves(basis, opt.window);
  const bool sweep = use_sweep(basis, opt);
  std::vector<double> hi;
  if (sweep) {
    hi = detail::sweep_boxes(basis, abs_values(f), std::nullopt, opt.window, false).hi;
  } else {
    hi = per_point(basis, opt, [&](const MSet& s) {
           return weighted_average(basis.space(), f, s);
         }).first;
  }
  require_covered(hi);
  return {Field(std::move(hi)), make_provenance(basis, "average", std::nullopt, opt, sweep)};
}

MSet median_superlevel_of_set(const Basis& basis, const MSet& e, Gamma gamma,
                              const MaximalOptions& opt) {
  const Space& space = basis.space();
  if (e.universe() != space.size()) throw DomainError("set does not belong to the space");
  check_window_resolves(basis, opt.window);
  const auto mask = e.mask();
  if (use_sweep(basis, opt))
    return MSet::from_mask(detail::sweep_superlevel(basis, mask, gamma.value(), opt.window));
  std::vector<Index> out;
  for (Index x = 0; x < space.size(); ++x)
    for (const Member& m : basis.sample_at(x, opt.window, opt.budget)) {
      const MSet s = basis.rasterize(m);
      double in = 0.0, all = 0.0;
      for (Index i : s.members()) {
        all += space.weight(i);
        if (mask[i]) in += space.weight(i);
      }
      if (in > 0.0 && !strictly_below(in, gamma.value() * all)) {
        out.push_back(x);
        break;
      }
    }
  return MSet(space.size(), std::move(out));
}

MSet median_superlevel(const Basis& basis, const Field& f, Gamma gamma, double lambda,
                       const MaximalOptions& opt) {
  check_field(basis, f);
  return median_superlevel_of_set(basis, abs_superlevel(f, lambda), gamma, opt);
}

MaximalField median_maximal_levelset(const Basis& basis, const Field& f, Gamma gamma,
                                     std::span<const double> lambda_grid,
                                     const MaximalOptions& opt) {
  check_field(basis, f);
  std::vector<double> grid(lambda_grid.begin(), lambda_grid.end());
  if (grid.empty()) {
    grid = abs_values(f);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("lambda grid must be increasing");
  double top = 0.0;
  for (Index i = 0; i < f.size(); ++i) top = std::max(top, std::abs(f[i]));

  const Index n = static_cast<Index>(f.size());
  std::vector<double> q(n, top);
  std::vector<char> settled(n, 0);
  // Superlevel sets shrink as lambda grows; each point settles at the first
  // level it fails to exceed.
  for (double lambda : grid) {
    const auto above = median_superlevel(basis, f, gamma, lambda, opt).mask();
    for (Index i = 0; i < n; ++i)
      if (!settled[i] && !above[i]) {
        q[i] = lambda;
        settled[i] = 1;
      }
  }
  return {Field(std::move(q)),
          make_provenance(basis, "median_levelset", gamma.value(), opt, use_sweep(basis, opt))};
}

MaximalField restricted_maximal(const Basis& basis, const Field& f, std::optional<Gamma> gamma,
                                double r, const MaximalOptions& opt) {
  if (!(r > basis.space().resolution()))
    throw ResolutionExhausted("scale cap does not exceed the space resolution");
  MaximalOptions o = opt;
  o.window = Window{0.0, r};
  auto out = gamma ? median_maximal(basis, f, *gamma, o) : avg_maximal(basis, f, o);
  out.provenance.op = "restricted_" + out.provenance.op;
  return out;
}

LimsupLiminf limsup_liminf_median(const Basis& basis, const Field& f, Gamma gamma,
                                  std::span<const double> scales, const MaximalOptions& opt) {
  check_field(basis, f);
  if (scales.empty()) throw DomainError("scale sequence is empty");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] < scales[i - 1])) throw DomainError("scale sequence must decrease");
  double eps = -1.0;
  for (double s : scales)
    if (s > basis.space().resolution()) eps = s;
  if (eps < 0.0) throw ResolutionExhausted("no listed scale exceeds the space resolution");

  MaximalOptions o = opt;
  o.window = Window{0.0, eps};
  const auto values = std::vector<double>(f.values().begin(), f.values().end());
  std::vector<double> hi, lo;
  if (use_sweep(basis, o)) {
    auto r = detail::sweep_boxes(basis, values, gamma.value(), o.window, true);
    hi = std::move(r.hi);
    lo = std::move(r.lo);
  } else {
    auto r = per_point(basis, o, [&](const MSet& s) {
      return set_median(basis.space(), values, s, gamma.value());
    });
    hi = std::move(r.first);
    lo = std::move(r.second);
  }
  require_covered(hi);
  require_covered(lo);
  return {Field(std::move(hi)), Field(std::move(lo)), eps};
}

Field median_maximal(const Space& space, const SetCollection& sets, const Field& f, Gamma gamma,
                     const MedianKernel& kernel) {
  if (sets.at.size() != space.size()) throw DomainError("collection does not match the space");
  const Field a = f.abs();
  std::vector<double> out(space.size(), 0.0);
  for (Index x = 0; x < space.size(); ++x) {
    if (sets.at[x].empty()) throw DomainError("no set selected at some point");
    double best = -std::numeric_limits<double>::infinity();
    for (auto id : sets.at[x])
      best = std::max(best, gamma_median_with(kernel, space, a, sets.sets[id], gamma));
    out[x] = best;
  }
  return Field(std::move(out));
}

Field avg_maximal(const Space& space, const SetCollection& sets, const Field& f) {
  if (sets.at.size() != space.size()) throw DomainError("collection does not match the space");
  std::vector<double> out(space.size(), 0.0);
  for (Index x = 0; x < space.size(); ++x) {
    if (sets.at[x].empty()) throw DomainError("no set selected at some point");
    double best = -std::numeric_limits<double>::infinity();
    for (auto id : sets.at[x]) best = std::max(best, weighted_average(space, f, sets.sets[id]));
    out[x] = best;
  }
  return Field(std::move(out));
}

MSet median_superlevel(const Space& space, const SetCollection& sets, const Field& f, Gamma gamma,
                       double lambda) {
  const auto mask = abs_superlevel(f, lambda).mask();
  std::vector<Index> out;
  for (Index x = 0; x < space.size(); ++x)
    for (auto id : sets.at[x]) {
      double in = 0.0, all = 0.0;
      for (Index i : sets.sets[id].members()) {
        all += space.weight(i);
        if (mask[i]) in += space.weight(i);
      }
      if (in > 0.0 && !strictly_below(in, gamma.value() * all)) {
        out.push_back(x);
        break;
      }
    }
  return MSet(space.size(), std::move(out));
}

}  // namespace medmax
