#include "convex.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "medmax/errors.hpp"

namespace medmax::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cone_sum(const ConeCon& k, const std::vector<double>& z) {
  double s = k.s0;
  for (std::size_t i = 0; i < k.v.size(); ++i) s += k.w[i] * std::pow(z[k.v[i]], k.a);
  return s;
}

// r^(1/a) t^(1-1/a) >= |v| with v = z[j] or the constant c when j < 0.
// Barrier -log(r^(2/a) t^(2-2/a) - v^2) - log r - log t, logarithmically
// homogeneous of degree 4.
struct PowCone {
  int r, t, j;
  double c, alpha;
};

// Each norm cone z_t >= (s0 + sum w_i z_i^a)^(1/a) is lifted to
//   z_t >= sum w_i r_i + r_0,  (r_i, z_t, z_i) and (r_0, z_t, s0^(1/a)) power cones;
// for a = 1 it is a single linear inequality.
struct Lifted {
  int n = 0;
  std::vector<double> c;
  std::vector<LinCon> lin;
  std::vector<PowCone> pow;

  double nu() const { return static_cast<double>(lin.size() + 4 * pow.size()); }
};

Lifted lift(const ConvexProblem& p) {
  Lifted l;
  l.n = p.n;
  l.c = p.c;
  l.lin = p.lin;
  for (const auto& k : p.cones) {
    LinCon sum;
    sum.a.push_back({k.t, 1.0});
    if (k.a == 1.0) {
      for (std::size_t i = 0; i < k.v.size(); ++i) sum.a.push_back({k.v[i], -k.w[i]});
      sum.b = k.s0;
      l.lin.push_back(std::move(sum));
      continue;
    }
    auto add = [&](int j, double c, double w) {
      const int r = l.n++;
      l.c.push_back(0.0);
      sum.a.push_back({r, -w});
      l.pow.push_back({r, k.t, j, c, 1.0 / k.a});
    };
    for (std::size_t i = 0; i < k.v.size(); ++i) add(k.v[i], 0.0, k.w[i]);
    if (k.s0 > 0.0) add(-1, std::pow(k.s0, 1.0 / k.a), 1.0);
    l.lin.push_back(std::move(sum));
  }
  return l;
}

// Extends a point strictly inside the original cones to the lifted variables.
std::vector<double> lift_point(const ConvexProblem& p, const Lifted& l, std::vector<double> z) {
  z.resize(l.n, 0.0);
  int r = p.n;
  for (const auto& k : p.cones) {
    if (k.a == 1.0) continue;
    const double zt = z[k.t];
    const double kappa = cone_sum(k, z) * std::pow(zt, 1.0 - k.a) / zt;  // (N/z_t)^a < 1
    const double theta = kappa > 0.0 ? 0.5 * (1.0 + 1.0 / kappa) : 1.0;
    double wsum = k.s0 > 0.0 ? 1.0 : 0.0;
    for (double w : k.w) wsum += w;
    const double eta = zt * (1.0 - theta * kappa) / (2.0 * (wsum + 1.0));
    for (std::size_t i = 0; i < k.v.size(); ++i)
      z[r++] = theta * std::pow(z[k.v[i]], k.a) * std::pow(zt, 1.0 - k.a) + eta;
    if (k.s0 > 0.0) z[r++] = theta * k.s0 * std::pow(zt, 1.0 - k.a) + eta;
  }
  return z;
}

double pow_value(const PowCone& k, const std::vector<double>& z) {
  return k.j >= 0 ? z[k.j] : k.c;
}

// Barrier value, or +inf outside the domain.
double barrier(const Lifted& p, const std::vector<double>& z) {
  double phi = 0.0;
  for (const auto& l : p.lin) {
    double s = -l.b;
    for (auto [j, a] : l.a) s += a * z[j];
    if (!(s > 0.0)) return kInf;
    phi -= std::log(s);
  }
  for (const auto& k : p.pow) {
    const double r = z[k.r], t = z[k.t], v = pow_value(k, z);
    if (!(r > 0.0) || !(t > 0.0)) return kInf;
    const double psi = std::pow(r, 2.0 * k.alpha) * std::pow(t, 2.0 - 2.0 * k.alpha) - v * v;
    if (!(psi > 0.0)) return kInf;
    phi -= std::log(psi) + std::log(r) + std::log(t);
  }
  return phi;
}

double linear(const Lifted& p, const std::vector<double>& z) {
  double v = 0.0;
  for (int j = 0; j < p.n; ++j) v += p.c[j] * z[j];
  return v;
}

void derivatives(const Lifted& p, const std::vector<double>& z, double t, Eigen::VectorXd& g,
                 Eigen::MatrixXd& h) {
  g.setZero(p.n);
  h.setZero(p.n, p.n);
  for (int j = 0; j < p.n; ++j) g[j] = t * p.c[j];
  for (const auto& l : p.lin) {
    double s = -l.b;
    for (auto [j, a] : l.a) s += a * z[j];
    const double inv = 1.0 / s, inv2 = inv * inv;
    for (auto [i, ai] : l.a) {
      g[i] -= ai * inv;
      for (auto [j, aj] : l.a) h(i, j) += ai * aj * inv2;
    }
  }
  for (const auto& k : p.pow) {
    const double r = z[k.r], tt = z[k.t], v = pow_value(k, z), al = k.alpha;
    const double pr = std::pow(r, 2.0 * al) * std::pow(tt, 2.0 - 2.0 * al);
    const double psi = pr - v * v;
    // Gradient and Hessian of psi in (r, t, v).
    const double d[3] = {2.0 * al * pr / r, 2.0 * (1.0 - al) * pr / tt, -2.0 * v};
    const double hh[3][3] = {
        {2.0 * al * (2.0 * al - 1.0) * pr / (r * r), 4.0 * al * (1.0 - al) * pr / (r * tt), 0.0},
        {4.0 * al * (1.0 - al) * pr / (r * tt), 2.0 * (1.0 - al) * (1.0 - 2.0 * al) * pr / (tt * tt),
         0.0},
        {0.0, 0.0, -2.0}};
    const int idx[3] = {k.r, k.t, k.j};
    const int dim = k.j >= 0 ? 3 : 2;
    const double ip = 1.0 / psi;
    for (int a = 0; a < dim; ++a) {
      g[idx[a]] -= d[a] * ip;
      for (int b = 0; b < dim; ++b) h(idx[a], idx[b]) += d[a] * d[b] * ip * ip - hh[a][b] * ip;
    }
    g[k.r] -= 1.0 / r;
    g[k.t] -= 1.0 / tt;
    h(k.r, k.r) += 1.0 / (r * r);
    h(k.t, k.t) += 1.0 / (tt * tt);
  }
}

bool strictly_inside(const ConvexProblem& p, const std::vector<double>& z) {
  for (const auto& l : p.lin) {
    double s = -l.b;
    for (auto [j, a] : l.a) s += a * z[j];
    if (!(s > 0.0)) return false;
  }
  for (const auto& k : p.cones) {
    for (int j : k.v)
      if (!(z[j] >= 0.0)) return false;
    if (!(z[k.t] > cone_value(k, z))) return false;
  }
  return true;
}

}  // namespace

double cone_value(const ConeCon& k, const std::vector<double>& z) {
  return std::pow(cone_sum(k, z), 1.0 / k.a);
}

ConvexResult solve_barrier(const ConvexProblem& p, std::vector<double> z0, double abs_tol,
                           double rel_tol, int max_newton) {
  if (static_cast<int>(z0.size()) != p.n) throw DomainError("initial point has wrong size");
  if (!strictly_inside(p, z0)) throw DomainError("initial point is not strictly feasible");
  const Lifted lp = lift(p);
  std::vector<double> z = lift_point(p, lp, std::move(z0));
  if (!std::isfinite(barrier(lp, z))) throw DomainError("initial point is not strictly feasible");
  const double m = lp.nu();
  ConvexResult r;
  double t = 1.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  std::vector<double> trial(lp.n);
  while (true) {
    // Centering by damped Newton steps.
    bool centered = false;
    const int before = r.newton_steps;
    for (int it = 0; it < 3000 && r.newton_steps < max_newton; ++it, ++r.newton_steps) {
      derivatives(lp, z, t, g, h);
      // Symmetric diagonal scaling keeps the factorization accurate when
      // variables approach their bounds at very different rates.
      const Eigen::VectorXd sc = h.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd hs = sc.asDiagonal() * h * sc.asDiagonal();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
      Eigen::VectorXd step = sc.cwiseProduct(ldlt.solve(-sc.cwiseProduct(g)));
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        hs.diagonal().array() += 1e-12;
        step = sc.cwiseProduct(hs.ldlt().solve(-sc.cwiseProduct(g)));
        if (!step.allFinite()) break;
      }
      const double dec = -g.dot(step);
      if (!(dec > 1e-12)) {
        centered = true;
        break;
      }
      const double f0 = t * linear(lp, z) + barrier(lp, z);
      double s = 1.0;
      bool moved = false;
      while (s > 1e-16) {
        for (int j = 0; j < lp.n; ++j) trial[j] = z[j] + s * step[j];
        const double f1 = t * linear(lp, trial) + barrier(lp, trial);
        if (std::isfinite(f1) && f1 <= f0 - 0.25 * s * dec) {
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
      z = trial;
      if (dec < 1e-10) {
        centered = true;
        break;
      }
    }
    r.objective = linear(lp, z);
    r.gap = m / t;
    if (centered && r.gap <= abs_tol + rel_tol * std::abs(r.objective)) {
      r.converged = true;
      break;
    }
    // A stalled centering means floating point has run out; report as is.
    if (!centered && r.newton_steps == before) break;
    if (r.newton_steps >= max_newton) break;
    t *= 8.0;
  }
  z.resize(p.n);
  r.z = std::move(z);
  return r;
}

}  // namespace medmax::detail
