#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "medmax/basis.hpp"
#include "medmax/median.hpp"

namespace medmax {

enum class Engine {
  automatic,  // sweep for box families, per-point otherwise
  per_point,  // rasterize every selected set; honors the budget
  sweep,      // exhaustive lattice sweep for box families
};

struct MaximalOptions {
  Window window;
  std::size_t budget = 10000;
  Engine engine = Engine::automatic;
};

struct Provenance {
  std::string op;
  std::optional<double> gamma;
  BasisFamily family;
  Window window;
  std::size_t budget = 0;
  std::string engine;
};

std::string provenance_json(const Provenance& p);

struct MaximalField {
  Field values;
  Provenance provenance;
};

// One "# {provenance}" line, a header, then index, coordinates, value.
void write_maximal_csv(std::ostream& out, const Space& space, const MaximalField& field);

// sup over selected B containing x of m^gamma_{|f|}(B).
MaximalField median_maximal(const Basis& basis, const Field& f, Gamma gamma,
                            const MaximalOptions& opt = {});

// sup over selected B containing x of the weighted average of |f| on B.
MaximalField avg_maximal(const Basis& basis, const Field& f, const MaximalOptions& opt = {});

// {x : some selected B containing x has mu(B n E) >= gamma mu(B)}, with the
// median tie rule. Equals {M^gamma chi_E > lambda} for every 0 <= lambda < 1.
MSet median_superlevel_of_set(const Basis& basis, const MSet& e, Gamma gamma,
                              const MaximalOptions& opt = {});

// {M^gamma f > lambda}, computed through the indicator of {|f| > lambda}.
MSet median_superlevel(const Basis& basis, const Field& f, Gamma gamma, double lambda,
                       const MaximalOptions& opt = {});

// Quantized M^gamma f: at each point the smallest grid level that the maximal
// function does not exceed. An empty grid means all distinct values of |f|,
// which reproduces median_maximal exactly.
MaximalField median_maximal_levelset(const Basis& basis, const Field& f, Gamma gamma,
                                     std::span<const double> lambda_grid,
                                     const MaximalOptions& opt = {});

// Maximal operator over sets of diameter < r; median when gamma is given,
// average otherwise.
MaximalField restricted_maximal(const Basis& basis, const Field& f, std::optional<Gamma> gamma,
                                double r, const MaximalOptions& opt = {});

struct LimsupLiminf {
  Field limsup;
  Field liminf;
  double scale = 0.0;
};

// Pointwise sup and inf of m^gamma_f(B) over B containing x with diameter
// below the finest listed scale that the space can resolve.
LimsupLiminf limsup_liminf_median(const Basis& basis, const Field& f, Gamma gamma,
                                  std::span<const double> scales, const MaximalOptions& opt = {});

// Explicit-collection operators. Every point uses the sets listed for it.
Field median_maximal(const Space& space, const SetCollection& sets, const Field& f, Gamma gamma,
                     const MedianKernel& kernel = weighted_median);
Field avg_maximal(const Space& space, const SetCollection& sets, const Field& f);
MSet median_superlevel(const Space& space, const SetCollection& sets, const Field& f, Gamma gamma,
                       double lambda);

}  // namespace medmax
