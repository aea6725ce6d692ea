#include "medmax/hajlasz.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "convex.hpp"
#include "medmax/util.hpp"

namespace medmax {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pair {
  Index x, y;
  double ds;  // d(x, y)^s
  int k;      // annulus index
};

std::vector<Pair> all_pairs(const Space& space, double s) {
  std::vector<Pair> out;
  for (Index x = 0; x < space.size(); ++x)
    for (Index y = x + 1; y < space.size(); ++y) {
      const double d = space.distance(x, y);
      out.push_back({x, y, std::pow(d, s), annulus_index(d)});
    }
  return out;
}

double power_norm(std::span<const double> v, std::span<const double> w, double a) {
  if (std::isinf(a)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (w.empty() ? 1.0 : w[i]) * std::pow(v[i], a);
  return std::pow(s, 1.0 / a);
}

// Epigraph z_t >= norm_a(z_v; w) with an optional constant mass s0; a may be
// infinite, in which case it becomes z_t >= z_v[i] for every i.
struct Epi {
  int t;
  std::vector<int> v;
  std::vector<double> w;
  double a;
  double s0 = 0.0;
};

// Gradient variables, their norm structure and the initialization order.
class GradientModel {
 public:
  GradientModel(detail::ConvexProblem& p, const Space& space, const FSpaceSpec& spec,
                const std::vector<Pair>& pairs)
      : p_(p), space_(space), spec_(spec) {
    for (const auto& pr : pairs) {
      const int slot = slot_of(pr.k);
      var_for(slot, pr.x);
      var_for(slot, pr.y);
    }
    build_norm();
  }

  int slot_of(int k) {
    if (spec_.kind == FSpaceKind::hajlasz) k = 0;
    auto it = slots_.find(k);
    if (it != slots_.end()) return it->second;
    const int id = static_cast<int>(slot_k_.size());
    slots_[k] = id;
    slot_k_.push_back(k);
    vars_.emplace_back(space_.size(), -1);
    return id;
  }
  int var(int slot, Index x) const { return vars_[slot][x]; }
  int seminorm_var() const { return top_; }
  int slot_count() const { return static_cast<int>(slot_k_.size()); }
  int slot_k(int slot) const { return slot_k_[slot]; }
  const std::vector<int>& gradient_vars() const { return gvars_; }

  // Gradient variables take `g0`; epigraphs are lifted in creation order.
  void init(std::vector<double>& z, double g0) const {
    for (int j : gvars_) z[j] = g0;
    for (const auto& e : epis_) {
      std::vector<double> v;
      for (int j : e.v) v.push_back(z[j]);
      double n = power_norm(v, e.w, e.a);
      if (e.s0 > 0.0) n = std::pow(std::pow(n, e.a) + e.s0, 1.0 / e.a);
      z[e.t] = 2.0 * n + 1.0;
    }
  }

  static void lower_epis(detail::ConvexProblem& p, const std::vector<Epi>& epis) {
    for (const auto& e : epis) {
      if (std::isinf(e.a)) {
        for (int j : e.v) p.lin.push_back({{{e.t, 1.0}, {j, -1.0}}, 0.0});
      } else {
        p.cones.push_back({e.t, e.v, e.w, e.a, e.s0});
      }
    }
  }
  const std::vector<Epi>& epis() const { return epis_; }

 private:
  int var_for(int slot, Index x) {
    int& v = vars_[slot][x];
    if (v < 0) {
      v = p_.add_var();
      gvars_.push_back(v);
      p_.lin.push_back({{{v, 1.0}}, 0.0});
    }
    return v;
  }

  int epigraph(std::vector<int> v, std::vector<double> w, double a) {
    if (v.size() == 1 && (w.empty() || w[0] == 1.0)) return v[0];
    return force_epigraph(std::move(v), std::move(w), a);
  }

  int force_epigraph(std::vector<int> v, std::vector<double> w, double a) {
    if (w.empty()) w.assign(v.size(), 1.0);
    const int t = p_.add_var();
    epis_.push_back({t, std::move(v), std::move(w), a});
    return t;
  }

  void build_norm() {
    const double pe = spec_.p, qe = spec_.q;
    if (gvars_.empty()) return;
    if (spec_.kind == FSpaceKind::hajlasz) {
      std::vector<int> v;
      std::vector<double> w;
      for (Index x = 0; x < space_.size(); ++x)
        if (vars_[0][x] >= 0) {
          v.push_back(vars_[0][x]);
          w.push_back(space_.weight(x));
        }
      top_ = force_epigraph(std::move(v), std::move(w), pe);
    } else if (spec_.kind == FSpaceKind::triebel) {
      std::vector<int> hv;
      std::vector<double> hw;
      for (Index x = 0; x < space_.size(); ++x) {
        std::vector<int> v;
        for (int sl = 0; sl < slot_count(); ++sl)
          if (vars_[sl][x] >= 0) v.push_back(vars_[sl][x]);
        if (v.empty()) continue;
        hv.push_back(epigraph(std::move(v), {}, qe));
        hw.push_back(space_.weight(x));
      }
      top_ = force_epigraph(std::move(hv), std::move(hw), pe);
    } else {
      std::vector<int> nv;
      for (int sl = 0; sl < slot_count(); ++sl) {
        std::vector<int> v;
        std::vector<double> w;
        for (Index x = 0; x < space_.size(); ++x)
          if (vars_[sl][x] >= 0) {
            v.push_back(vars_[sl][x]);
            w.push_back(space_.weight(x));
          }
        nv.push_back(force_epigraph(std::move(v), std::move(w), pe));
      }
      top_ = force_epigraph(std::move(nv), {}, qe);
    }
  }

  detail::ConvexProblem& p_;
  const Space& space_;
  FSpaceSpec spec_;
  std::map<int, int> slots_;
  std::vector<int> slot_k_;
  std::vector<std::vector<int>> vars_;
  std::vector<int> gvars_;
  std::vector<Epi> epis_;
  int top_ = -1;
};

void check_u(const Space& space, const Field& u) {
  if (u.size() != space.size()) throw DomainError("field does not belong to the space");
}

void check_cap(const Space& space, std::size_t cap) {
  if (space.size() > cap)
    throw SizeCapExceeded("solver is capped at " + std::to_string(cap) + " points");
}

double min_pair_ds(const std::vector<Pair>& pairs) {
  double m = kInf;
  for (const auto& pr : pairs) m = std::min(m, pr.ds);
  return m;
}

// Reads the solved gradient into a field or a sequence over the realized range.
void extract(const Space& space, const GradientModel& gm, const std::vector<double>& z,
             const FSpaceSpec& spec, NormResult& out) {
  if (spec.kind == FSpaceKind::hajlasz) {
    std::vector<double> g(space.size(), 0.0);
    if (gm.slot_count() > 0)
      for (Index x = 0; x < space.size(); ++x)
        if (gm.var(0, x) >= 0) g[x] = std::max(0.0, z[gm.var(0, x)]);
    out.g = Field(std::move(g));
    return;
  }
  const auto [kmin, kmax] = realized_annuli(space);
  out.seq = GradientSeq::zeros(kmin, kmax, space.size());
  for (int sl = 0; sl < gm.slot_count(); ++sl) {
    std::vector<double> g(space.size(), 0.0);
    for (Index x = 0; x < space.size(); ++x)
      if (gm.var(sl, x) >= 0) g[x] = std::max(0.0, z[gm.var(sl, x)]);
    out.seq.g[static_cast<std::size_t>(gm.slot_k(sl) - kmin)] = Field(std::move(g));
  }
}

// Minimal seminorm of a fixed u over the given pairs.
NormResult solve_fixed(const Space& space, const Field& u, const FSpaceSpec& spec,
                       const std::vector<Pair>& pairs, const SolverOptions& opt) {
  std::vector<Pair> active;
  std::vector<double> rhs;
  for (const auto& pr : pairs) {
    const double c = std::abs(u[pr.x] - u[pr.y]) / pr.ds;
    if (c > 0.0) {
      active.push_back(pr);
      rhs.push_back(c);
    }
  }
  NormResult out;
  detail::ConvexProblem prob;
  GradientModel gm(prob, space, spec, active);
  if (gm.seminorm_var() < 0) {
    extract(space, gm, {}, spec, out);
    out.converged = true;
    return out;
  }
  double cmax = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto& pr = active[i];
    const int sl = gm.slot_of(pr.k);
    prob.lin.push_back({{{gm.var(sl, pr.x), 1.0}, {gm.var(sl, pr.y), 1.0}}, rhs[i]});
    cmax = std::max(cmax, rhs[i]);
  }
  GradientModel::lower_epis(prob, gm.epis());
  prob.c.assign(prob.n, 0.0);
  prob.c[gm.seminorm_var()] = 1.0;
  std::vector<double> z0(prob.n, 0.0);
  gm.init(z0, cmax + 1.0);
  const auto sol = detail::solve_barrier(prob, z0, opt.abs_tol, opt.rel_tol, opt.max_newton);
  extract(space, gm, sol.z, spec, out);
  out.converged = sol.converged;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto& pr = active[i];
    const int sl = gm.slot_of(pr.k);
    const double gx = std::max(0.0, sol.z[gm.var(sl, pr.x)]);
    const double gy = std::max(0.0, sol.z[gm.var(sl, pr.y)]);
    out.residual = std::max(out.residual, rhs[i] - (gx + gy));
  }
  return out;
}

}  // namespace

int annulus_index(double d) {
  if (!(d > 0.0) || std::isinf(d)) throw DomainError("annulus needs a positive finite distance");
  int e = 0;
  std::frexp(d, &e);  // d in [2^(e-1), 2^e)
  return -e;
}

Violation is_s_gradient(const Space& space, const Field& u, const Field& g, double s) {
  check_u(space, u);
  if (g.size() != space.size()) throw DomainError("gradient does not belong to the space");
  for (double v : g.values())
    if (v < 0.0) throw DomainError("gradients are nonnegative");
  Violation worst;
  bool first = true;
  for (Index x = 0; x < space.size(); ++x)
    for (Index y = x + 1; y < space.size(); ++y) {
      const double ex = std::abs(u[x] - u[y]) - std::pow(space.distance(x, y), s) * (g[x] + g[y]);
      if (first || ex > worst.excess) {
        worst = {ex <= 0.0, x, y, 0, ex};
        first = false;
      }
    }
  worst.ok = first || worst.excess <= 0.0;
  return worst;
}

GradientSeq GradientSeq::zeros(int k_min, int k_max, std::size_t n) {
  GradientSeq s;
  s.k_min = k_min;
  s.k_max = k_max;
  for (int k = k_min; k <= k_max; ++k) s.g.push_back(Field::constant(n, 0.0));
  return s;
}

std::pair<int, int> realized_annuli(const Space& space) {
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (Index x = 0; x < space.size(); ++x)
    for (Index y = x + 1; y < space.size(); ++y) {
      const int k = annulus_index(space.distance(x, y));
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  if (lo > hi) return {0, -1};
  return {lo, hi};
}

Violation is_fractional_s_gradient(const Space& space, const Field& u, const GradientSeq& seq,
                                   double s) {
  check_u(space, u);
  if (seq.g.size() != static_cast<std::size_t>(std::max(0, seq.k_max - seq.k_min + 1)))
    throw DomainError("gradient sequence does not match its range");
  for (const auto& f : seq.g) {
    if (f.size() != space.size()) throw DomainError("gradient does not belong to the space");
    for (double v : f.values())
      if (v < 0.0) throw DomainError("gradients are nonnegative");
  }
  Violation worst;
  bool first = true;
  for (Index x = 0; x < space.size(); ++x)
    for (Index y = x + 1; y < space.size(); ++y) {
      const double d = space.distance(x, y);
      const int k = annulus_index(d);
      if (!seq.covers(k)) throw DomainError("gradient sequence does not cover annulus " + std::to_string(k));
      const Field& g = seq.at(k);
      const double ex = std::abs(u[x] - u[y]) - std::pow(d, s) * (g[x] + g[y]);
      if (first || ex > worst.excess) {
        worst = {ex <= 0.0, x, y, k, ex};
        first = false;
      }
    }
  worst.ok = first || worst.excess <= 0.0;
  return worst;
}

std::string to_string(FSpaceKind kind) {
  switch (kind) {
    case FSpaceKind::hajlasz: return "hajlasz";
    case FSpaceKind::triebel: return "triebel";
    case FSpaceKind::besov: return "besov";
  }
  return "?";
}

FSpaceKind fspace_kind_from_string(std::string_view name) {
  if (name == "hajlasz" || name == "M") return FSpaceKind::hajlasz;
  if (name == "triebel" || name == "M_pq") return FSpaceKind::triebel;
  if (name == "besov" || name == "N_pq") return FSpaceKind::besov;
  throw DomainError("unknown function space: " + std::string(name));
}

void FSpaceSpec::validate() const {
  if (!(s > 0.0)) throw DomainError("smoothness must be positive");
  if (kind == FSpaceKind::hajlasz ? !(s <= 1.0) : !(s < 1.0))
    throw DomainError("smoothness out of range");
  if (!(p > 0.0) || std::isinf(p)) throw DomainError("p must be positive and finite");
  if (!(q > 0.0)) throw DomainError("q must be positive");
  if (p < 1.0 || q < 1.0)
    throw NonconvexProblem("p < 1 or q < 1: minimization is nonconvex, only feasibility checks apply");
}

double gradient_norm(const Space& space, const Field& g, double p) { return lp_norm(space, g, p); }

double sequence_norm(const Space& space, const GradientSeq& seq, const FSpaceSpec& spec) {
  if (spec.kind == FSpaceKind::hajlasz) throw DomainError("sequence norms need triebel or besov");
  if (spec.kind == FSpaceKind::besov) {
    std::vector<double> per_k;
    for (const auto& g : seq.g) per_k.push_back(lp_norm(space, g, spec.p));
    return power_norm(per_k, {}, spec.q);
  }
  std::vector<double> h(space.size());
  for (Index x = 0; x < space.size(); ++x) {
    std::vector<double> v;
    for (const auto& g : seq.g) v.push_back(g[x]);
    h[x] = power_norm(v, {}, spec.q);
  }
  return lp_norm(space, Field(std::move(h)), spec.p);
}

NormResult hajlasz_norm(const Space& space, const Field& u, double s, double p,
                        const SolverOptions& opt) {
  check_u(space, u);
  check_cap(space, opt.size_cap);
  const FSpaceSpec spec{FSpaceKind::hajlasz, s, p, kInf};
  spec.validate();
  NormResult r = solve_fixed(space, u, spec, all_pairs(space, s), opt);
  r.seminorm = gradient_norm(space, r.g, p);
  r.lp_u = lp_norm(space, u, p);
  r.norm = r.lp_u + r.seminorm;
  return r;
}

NormResult seq_norm(const Space& space, const Field& u, const FSpaceSpec& spec,
                    const SolverOptions& opt) {
  check_u(space, u);
  check_cap(space, opt.size_cap);
  spec.validate();
  if (spec.kind == FSpaceKind::hajlasz) return hajlasz_norm(space, u, spec.s, spec.p, opt);
  const auto pairs = all_pairs(space, spec.s);
  NormResult r;
  if (spec.kind == FSpaceKind::besov) {
    // Each pair constrains one annulus only, so the l^q(L^p) problem splits.
    const auto [kmin, kmax] = realized_annuli(space);
    r.seq = GradientSeq::zeros(kmin, kmax, space.size());
    r.converged = true;
    const FSpaceSpec single{FSpaceKind::hajlasz, 1.0, spec.p, kInf};
    for (int k = kmin; k <= kmax; ++k) {
      std::vector<Pair> sub;
      for (const auto& pr : pairs)
        if (pr.k == k) sub.push_back(pr);
      const NormResult part = solve_fixed(space, u, single, sub, opt);
      r.seq.g[static_cast<std::size_t>(k - kmin)] = part.g;
      r.residual = std::max(r.residual, part.residual);
      r.converged = r.converged && part.converged;
    }
  } else {
    r = solve_fixed(space, u, spec, pairs, opt);
  }
  r.seminorm = r.seq.g.empty() ? 0.0 : sequence_norm(space, r.seq, spec);
  r.lp_u = lp_norm(space, u, spec.p);
  r.norm = r.lp_u + r.seminorm;
  return r;
}

CapacityResult capacity(const Space& space, const MSet& e, const FSpaceSpec& spec,
                        const CapacityOptions& opt) {
  spec.validate();
  if (e.universe() != space.size()) throw DomainError("set does not belong to the space");
  if (space.size() > opt.size_cap)
    throw SizeCapExceeded("capacity solves are capped at " + std::to_string(opt.size_cap) +
                          " points");
  const double rho = opt.rho ? *opt.rho : 0.5 * space.resolution();
  if (!(rho >= 0.0)) throw DomainError("neighborhood radius must be nonnegative");
  CapacityResult out;
  out.neighborhood = e.empty() ? e : enlargement(space, e, rho);
  const std::size_t n = space.size();
  if (e.empty()) {
    out.u = Field::constant(n, 0.0);
    out.converged = true;
    return out;
  }
  const auto nb = out.neighborhood.mask();
  const double p = spec.p;

  detail::ConvexProblem prob;
  std::vector<int> uvar(n, -1), avar(n, -1);
  double fixed_mass = 0.0;
  for (Index x = 0; x < n; ++x) {
    if (opt.restricted && nb[x]) {
      fixed_mass += space.weight(x);
      continue;
    }
    uvar[x] = prob.add_var();
    if (opt.restricted) {
      prob.lin.push_back({{{uvar[x], 1.0}}, 0.0});
      prob.lin.push_back({{{uvar[x], -1.0}}, -1.0});
    } else {
      avar[x] = prob.add_var();
      prob.lin.push_back({{{avar[x], 1.0}, {uvar[x], -1.0}}, 0.0});
      prob.lin.push_back({{{avar[x], 1.0}, {uvar[x], 1.0}}, 0.0});
      if (nb[x]) prob.lin.push_back({{{uvar[x], 1.0}}, 1.0});
    }
  }
  const bool any_free = std::any_of(uvar.begin(), uvar.end(), [](int v) { return v >= 0; });
  if (!any_free) {
    out.u = Field::constant(n, 1.0);
    out.lp_u = lp_norm(space, out.u, p);
    out.value = std::pow(out.lp_u, p);
    out.converged = true;
    return out;
  }

  // Pairs that can carry a difference.
  std::vector<Pair> pairs;
  for (const auto& pr : all_pairs(space, spec.s))
    if (uvar[pr.x] >= 0 || uvar[pr.y] >= 0) pairs.push_back(pr);
  GradientModel gm(prob, space, spec, pairs);
  for (const auto& pr : pairs) {
    const int sl = gm.slot_of(pr.k);
    const int gx = gm.var(sl, pr.x), gy = gm.var(sl, pr.y);
    // g_x + g_y >= +-(u_x - u_y) / d^s, constants moved to the right side.
    for (double sign : {1.0, -1.0}) {
      detail::LinCon c;
      c.a = {{gx, 1.0}, {gy, 1.0}};
      double b = 0.0;
      for (auto [pt, sg] : {std::pair<Index, double>{pr.x, sign}, {pr.y, -sign}}) {
        if (uvar[pt] >= 0) c.a.push_back({uvar[pt], -sg / pr.ds});
        else b += sg / pr.ds;
      }
      c.b = b;
      prob.lin.push_back(std::move(c));
    }
  }
  // ||u||_p epigraph; fixed ones contribute their mass.
  std::vector<Epi> lp_epi(1);
  lp_epi[0].t = prob.add_var();
  lp_epi[0].a = p;
  lp_epi[0].s0 = fixed_mass;
  for (Index x = 0; x < n; ++x)
    if (uvar[x] >= 0) {
      lp_epi[0].v.push_back(opt.restricted ? uvar[x] : avar[x]);
      lp_epi[0].w.push_back(space.weight(x));
    }
  GradientModel::lower_epis(prob, gm.epis());
  GradientModel::lower_epis(prob, lp_epi);
  prob.c.assign(prob.n, 0.0);
  prob.c[lp_epi[0].t] = 1.0;
  prob.c[gm.seminorm_var()] = 1.0;

  std::vector<double> z0(prob.n, 0.0);
  for (Index x = 0; x < n; ++x) {
    if (uvar[x] < 0) continue;
    const double start = opt.restricted ? 0.5 : (nb[x] ? 1.5 : 0.5);
    z0[uvar[x]] = start;
    if (avar[x] >= 0) z0[avar[x]] = start + 1.0;
  }
  gm.init(z0, 1.0 / min_pair_ds(pairs) + 1.0);
  {
    std::vector<double> v;
    for (int j : lp_epi[0].v) v.push_back(z0[j]);
    const double nrm = std::pow(std::pow(power_norm(v, lp_epi[0].w, p), p) + fixed_mass, 1.0 / p);
    z0[lp_epi[0].t] = 2.0 * nrm + 1.0;
  }
  const auto sol = detail::solve_barrier(prob, z0, opt.solver.abs_tol, opt.solver.rel_tol,
                                         opt.solver.max_newton);
  std::vector<double> u(n, 1.0);
  for (Index x = 0; x < n; ++x)
    if (uvar[x] >= 0) u[x] = sol.z[uvar[x]];
  out.u = Field(u);
  out.converged = sol.converged;

  NormResult grad;
  extract(space, gm, sol.z, spec, grad);
  out.seminorm = spec.kind == FSpaceKind::hajlasz ? gradient_norm(space, grad.g, p)
                                                  : sequence_norm(space, grad.seq, spec);
  out.lp_u = lp_norm(space, out.u, p);
  out.value = std::pow(out.lp_u + out.seminorm, p);
  // Certificate: the returned pair satisfies every gradient inequality.
  for (const auto& pr : pairs) {
    const double gx = spec.kind == FSpaceKind::hajlasz ? grad.g[pr.x] : grad.seq.at(pr.k)[pr.x];
    const double gy = spec.kind == FSpaceKind::hajlasz ? grad.g[pr.y] : grad.seq.at(pr.k)[pr.y];
    out.residual = std::max(out.residual, std::abs(u[pr.x] - u[pr.y]) - pr.ds * (gx + gy));
  }
  for (Index x = 0; x < n; ++x)
    if (nb[x]) out.residual = std::max(out.residual, 1.0 - u[x]);
  return out;
}

Report subadditivity_check(const Space& space, std::span<const std::vector<MSet>> families,
                           const FSpaceSpec& spec, const CapacityOptions& opt) {
  spec.validate();
  const double r = std::min(1.0, spec.q / spec.p);
  Report rep;
  rep.kind = "subadditivity";
  rep.inputs = json{{"space", space.size()}, {"kind", to_string(spec.kind)}, {"s", spec.s},
                    {"p", spec.p},          {"q", std::isinf(spec.q) ? json("inf") : json(spec.q)},
                    {"r", r},               {"families", families.size()}};
  rep.table.columns = {"family", "members", "union_capacity", "sum_capacity_r", "ratio"};
  double c_est = 0.0;
  for (std::size_t i = 0; i < families.size(); ++i) {
    const auto& fam = families[i];
    if (fam.empty()) throw DomainError("empty family");
    MSet uni = MSet::none(space.size());
    double sum = 0.0;
    for (const auto& e : fam) {
      uni = set_union(uni, e);
      sum += std::pow(capacity(space, e, spec, opt).value, r);
    }
    const double cu = std::pow(capacity(space, uni, spec, opt).value, r);
    if (cu == 0.0 && sum == 0.0) continue;
    const double ratio = sum == 0.0 ? kInf : cu / sum;
    c_est = std::max(c_est, ratio);
    rep.table.rows.push_back(json::array({i, fam.size(), cu, sum, ratio}));
  }
  rep.summary["c_est"] = std::isinf(c_est) ? json("inf") : json(c_est);
  rep.verdicts["finite"] = std::isfinite(c_est);
  return rep;
}

Report capacity_monotone_limit(const Space& space, std::span<const MSet> chain,
                               const FSpaceSpec& spec, const CapacityOptions& opt, double tol) {
  spec.validate();
  if (!(spec.p > 1.0 && spec.q > 1.0)) throw DomainError("the monotone limit needs p > 1 and q > 1");
  if (chain.empty()) throw DomainError("empty chain");
  for (std::size_t i = 1; i < chain.size(); ++i)
    if (!chain[i - 1].subset_of(chain[i])) throw DomainError("chain is not increasing");
  Report rep;
  rep.kind = "monotone_limit";
  rep.inputs = json{{"space", space.size()}, {"kind", to_string(spec.kind)}, {"s", spec.s},
                    {"p", spec.p},          {"q", std::isinf(spec.q) ? json("inf") : json(spec.q)},
                    {"length", chain.size()}, {"tol", tol}};
  rep.table.columns = {"i", "measure", "capacity"};
  std::vector<double> caps;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    caps.push_back(capacity(space, chain[i], spec, opt).value);
    rep.table.rows.push_back(json::array({i, measure(space, chain[i]), caps.back()}));
  }
  CapacityOptions unrestricted = opt;
  unrestricted.restricted = false;
  const double cu = capacity(space, chain.back(), spec, unrestricted).value;
  bool monotone = true;
  for (std::size_t i = 1; i < caps.size(); ++i)
    if (caps[i] < caps[i - 1] - 1e-6 * std::max(1.0, caps[i - 1])) monotone = false;
  rep.summary["limit"] = caps.back();
  rep.summary["union_capacity"] = cu;
  rep.summary["difference"] = std::abs(caps.back() - cu);
  rep.verdicts["nondecreasing"] = monotone;
  rep.verdicts["limit_matches"] = std::abs(caps.back() - cu) <= tol;
  rep.notes.push_back(
      "on a finite space the union of an increasing chain is its last element; the union is "
      "solved through the unrestricted admissible class as an independent formulation");
  return rep;
}

std::string to_string(WeakVariant v) {
  switch (v) {
    case WeakVariant::limsup_median: return "limsup_median";
    case WeakVariant::limsup_average: return "limsup_average";
    case WeakVariant::maximal: return "maximal";
  }
  return "?";
}

WeakVariant weak_variant_from_string(std::string_view name) {
  if (name == "limsup_median") return WeakVariant::limsup_median;
  if (name == "limsup_average") return WeakVariant::limsup_average;
  if (name == "maximal") return WeakVariant::maximal;
  throw DomainError("unknown weak-type variant: " + std::string(name));
}

Report capacitary_weak_type(const Basis& basis, std::span<const NamedField> inputs,
                            const FSpaceSpec& spec, Gamma gamma, std::span<const double> lambdas,
                            WeakVariant variant, std::optional<double> scale,
                            const CapacityOptions& opt) {
  spec.validate();
  const Space& space = basis.space();
  if (space.size() > opt.size_cap)
    throw SizeCapExceeded("capacity solves are capped at " + std::to_string(opt.size_cap) +
                          " points");
  if (inputs.empty() || lambdas.empty()) throw DomainError("need inputs and levels");
  std::vector<double> levels(lambdas.begin(), lambdas.end());
  for (double l : levels)
    if (!(l > 0.0)) throw DomainError("levels must be positive");
  std::sort(levels.begin(), levels.end());
  const double eps = scale ? *scale : 2.0 * space.resolution();

  Report rep;
  rep.kind = "captests";
  rep.inputs = json{{"family", json::parse(family_to_json(basis.family()))},
                    {"space", space.size()},
                    {"kind", to_string(spec.kind)},
                    {"s", spec.s},
                    {"p", spec.p},
                    {"q", std::isinf(spec.q) ? json("inf") : json(spec.q)},
                    {"gamma", gamma.value()},
                    {"variant", to_string(variant)},
                    {"scale", eps},
                    {"lambdas", levels}};
  rep.table.columns = {"input", "lambda", "set_measure", "capacity", "norm", "ratio"};
  double c_est = 0.0;
  bool infinite = false, monotone = true;
  for (const auto& in : inputs) {
    check_u(space, in.field);
    const double norm = seq_norm(space, in.field, spec, opt.solver).norm;
    Field level_field;
    if (variant == WeakVariant::limsup_median) {
      const std::vector<double> one{eps};
      level_field = limsup_liminf_median(basis, in.field.abs(), gamma, one).limsup;
    } else if (variant == WeakVariant::limsup_average) {
      level_field = restricted_maximal(basis, in.field, std::nullopt, eps).values;
    }
    double prev = kInf;
    for (double lambda : levels) {
      const MSet set = variant == WeakVariant::maximal
                           ? median_superlevel(basis, in.field, gamma, lambda)
                           : superlevel(level_field, lambda);
      const double cap = capacity(space, set, spec, opt).value;
      if (cap > prev + 1e-6 * std::max(1.0, prev)) monotone = false;
      prev = cap;
      const double denom = std::pow(norm, spec.p);
      double ratio = 0.0;
      if (denom == 0.0) {
        if (cap > 0.0) infinite = true;
        ratio = cap > 0.0 ? kInf : 0.0;
      } else {
        ratio = cap * std::pow(lambda, spec.p) / denom;
      }
      c_est = std::max(c_est, ratio);
      rep.table.rows.push_back(json::array(
          {in.name, lambda, measure(space, set), cap, norm, std::isinf(ratio) ? json("inf") : json(ratio)}));
    }
  }
  std::vector<BallSample> sample;
  for (Index x = 0; x < space.size(); ++x)
    for (double r : {1.5, 3.0}) sample.push_back({x, r * space.resolution()});
  const auto dbl = estimate_doubling(space, sample);
  rep.summary["c_est"] = infinite ? json("inf") : json(c_est);
  rep.summary["doubling_constant"] = dbl.constant;
  rep.verdicts["finite"] = !infinite;
  rep.verdicts["capacity_nonincreasing_in_lambda"] = monotone;
  return rep;
}

}  // namespace medmax
