#pragma once

// Small dense log-barrier interior-point solver for
//   minimize c.z  subject to  A z >= b  and  z_t >= (s0 + sum w_i z_{v_i}^a)^(1/a).
// Every nonlinear term is expressed through such power-norm cones, so the
// objective stays linear.

#include <utility>
#include <vector>

namespace medmax::detail {

struct LinCon {
  std::vector<std::pair<int, double>> a;
  double b = 0.0;
};

// z_t >= N(z_v) with N = (s0 + sum w_i z_{v_i}^a)^(1/a), a >= 1. The members
// z_v must be kept nonnegative by linear constraints.
struct ConeCon {
  int t = 0;
  std::vector<int> v;
  std::vector<double> w;
  double a = 1.0;
  double s0 = 0.0;
};

struct ConvexProblem {
  int n = 0;
  std::vector<double> c;
  std::vector<LinCon> lin;
  std::vector<ConeCon> cones;

  int add_var(double cost = 0.0) {
    c.push_back(cost);
    return n++;
  }
};

struct ConvexResult {
  std::vector<double> z;
  double objective = 0.0;
  double gap = 0.0;  // barrier duality-gap bound at exit
  int newton_steps = 0;
  bool converged = false;
};

double cone_value(const ConeCon& k, const std::vector<double>& z);

// z0 must be strictly feasible. Stops when the gap bound falls below
// abs_tol + rel_tol * |objective|.
ConvexResult solve_barrier(const ConvexProblem& p, std::vector<double> z0, double abs_tol = 1e-7,
                           double rel_tol = 1e-9, int max_newton = 5000);

}  // namespace medmax::detail
