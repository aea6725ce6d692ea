#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medmax/experiments.hpp"

namespace medmax {

// Dyadic annulus index k with 2^(-k-1) <= d < 2^(-k).
int annulus_index(double d);

struct Violation {
  bool ok = true;
  Index x = 0, y = 0;
  int k = 0;            // annulus of the worst pair (fractional check only)
  double excess = 0.0;  // |u(x)-u(y)| - d^s (g(x)+g(y)) at the worst pair
};

// |u(x) - u(y)| <= d(x,y)^s (g(x) + g(y)) for all pairs, checked exactly.
Violation is_s_gradient(const Space& space, const Field& u, const Field& g, double s);

// One nonnegative field per annulus k in [k_min, k_max].
struct GradientSeq {
  int k_min = 0, k_max = -1;
  std::vector<Field> g;

  static GradientSeq zeros(int k_min, int k_max, std::size_t n);
  bool covers(int k) const { return k >= k_min && k <= k_max; }
  const Field& at(int k) const { return g.at(static_cast<std::size_t>(k - k_min)); }
};

// Smallest annulus range containing every pairwise distance.
std::pair<int, int> realized_annuli(const Space& space);

// Per-annulus check. Throws DomainError when some pair's annulus lies outside
// the sequence's range.
Violation is_fractional_s_gradient(const Space& space, const Field& u, const GradientSeq& seq,
                                   double s);

enum class FSpaceKind {
  hajlasz,  // M^{s,p}
  triebel,  // M^s_{p,q}, L^p(l^q)
  besov,    // N^s_{p,q}, l^q(L^p)
};

std::string to_string(FSpaceKind kind);
FSpaceKind fspace_kind_from_string(std::string_view name);

struct FSpaceSpec {
  FSpaceKind kind = FSpaceKind::hajlasz;
  double s = 1.0;
  double p = 2.0;
  double q = std::numeric_limits<double>::infinity();

  // Range checks; NonconvexProblem when p < 1 or q < 1.
  void validate() const;
};

struct SolverOptions {
  double abs_tol = 1e-7;  // barrier gap bound at exit
  double rel_tol = 1e-9;
  int max_newton = 20000;
  std::size_t size_cap = 64;  // dense solves above this many points are refused
};

struct NormResult {
  double seminorm = 0.0;
  double lp_u = 0.0;
  double norm = 0.0;  // lp_u + seminorm
  Field g;            // hajlasz kind: the minimizing gradient
  GradientSeq seq;    // triebel/besov: the minimizing sequence
  double residual = 0.0;  // largest constraint violation of the returned gradient
  bool converged = false;
};

// inf ||g||_p over s-gradients g of u.
NormResult hajlasz_norm(const Space& space, const Field& u, double s, double p,
                        const SolverOptions& opt = {});

// inf of the mixed norm over fractional s-gradients; the hajlasz kind
// delegates to hajlasz_norm.
NormResult seq_norm(const Space& space, const Field& u, const FSpaceSpec& spec,
                    const SolverOptions& opt = {});

// Norm of an explicit gradient or sequence.
double gradient_norm(const Space& space, const Field& g, double p);
double sequence_norm(const Space& space, const GradientSeq& seq, const FSpaceSpec& spec);

struct CapacityOptions {
  std::optional<double> rho;  // neighborhood radius; default half the resolution
  bool restricted = true;     // 0 <= u <= 1 with u = 1 on the neighborhood
  std::size_t size_cap = 64;
  SolverOptions solver;
};

struct CapacityResult {
  double value = 0.0;  // (||u||_p + seminorm)^p
  Field u;
  double lp_u = 0.0;
  double seminorm = 0.0;
  MSet neighborhood;
  double residual = 0.0;
  bool converged = false;
};

CapacityResult capacity(const Space& space, const MSet& e, const FSpaceSpec& spec,
                        const CapacityOptions& opt = {});

// Per family {E_i}: C(union)^r / sum C(E_i)^r with r = min(1, q/p); C_est is
// the largest such ratio.
Report subadditivity_check(const Space& space, std::span<const std::vector<MSet>> families,
                           const FSpaceSpec& spec, const CapacityOptions& opt = {});

// Capacities along an increasing chain, compared with the capacity of the
// union computed through the unrestricted admissible class.
Report capacity_monotone_limit(const Space& space, std::span<const MSet> chain,
                               const FSpaceSpec& spec, const CapacityOptions& opt = {},
                               double tol = 1e-3);

enum class WeakVariant {
  limsup_median,   // {limsup m^gamma_|u|(B) > lambda}
  limsup_average,  // {limsup |u|_B > lambda}
  maximal,         // {M^gamma u > lambda}
};

std::string to_string(WeakVariant v);
WeakVariant weak_variant_from_string(std::string_view name);

// Capacity of superlevel sets against lambda^-p ||u||_F^p. Limsup variants use
// sets of diameter below `scale` (default twice the resolution).
Report capacitary_weak_type(const Basis& basis, std::span<const NamedField> inputs,
                            const FSpaceSpec& spec, Gamma gamma, std::span<const double> lambdas,
                            WeakVariant variant, std::optional<double> scale = std::nullopt,
                            const CapacityOptions& opt = {});

}  // namespace medmax
