#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "medmax/maximal.hpp"

namespace medmax {

// Per-scale or per-level measurements. Rows are JSON arrays aligned with
// `columns`; numbers are written with round-trip precision.
struct Table {
  std::vector<std::string> columns;
  std::vector<nlohmann::json> rows;
};

void write_csv(std::ostream& out, const Table& table);

// Every reported constant is the observed maximum over the declared sample.
struct Report {
  std::string kind;
  nlohmann::json inputs = nlohmann::json::object();
  Table table;
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json verdicts = nlohmann::json::object();
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

struct NamedField {
  std::string name;
  Field field;
  // Lipschitz constant in the space metric when known, NaN otherwise.
  double lipschitz = std::numeric_limits<double>::quiet_NaN();
};

// Test functions laid out in coordinates normalized to the bounding box of
// the points, so that the same seed gives the same continuum inputs at every
// resolution.
struct CorpusSpec {
  int rects = 3;    // indicators of boxes; the first is centered with side rect_min
  int unions = 2;   // indicators of unions of three boxes
  int bumps = 2;    // Lipschitz tents
  int jumps = 2;    // a jump across a hyperplane
  int heavy = 2;    // truncated |x - x0|^-alpha
  double rect_min = 0.05, rect_max = 0.25;  // box sides, normalized
  std::uint64_t seed = 1;
};

nlohmann::json corpus_to_json(const CorpusSpec& spec);
CorpusSpec corpus_from_json(const nlohmann::json& j);

std::vector<NamedField> make_corpus(const Space& space, const CorpusSpec& spec);

// Indicator of the box prod [lo_i, hi_i) in absolute coordinates.
MSet box_set(const Space& space, std::span<const double> lo, std::span<const double> hi);

struct ExperimentOptions {
  MaximalOptions maximal;  // window.hi is overridden by per-scale windows
  double tol = 1e-9;
  int margin = 0;  // grids: ignore points closer than this many cells to the edge
};

// Per scale, the fraction of sampled points where some basis set of diameter
// below the scale has |mu(A n B)/mu(B) - chi_A(x)| > tol.
Report density_test(const Basis& basis, std::span<const MSet> sets,
                    std::span<const double> scales, const ExperimentOptions& opt = {});

// Per scale and gamma, the fraction of sampled points with
// |m^gamma_f(B) - f(x)| > tol + lipschitz * scale for some admissible B.
Report lebesgue_point_test(const Basis& basis, const NamedField& f, std::span<const double> gammas,
                           std::span<const double> scales, const ExperimentOptions& opt = {});

// C_est = max over inputs and levels of mu({M^gamma f > lambda}) / mu({|f| > lambda}).
// An empty level list uses every level at which either set can change.
Report weak_type_constant(const Basis& basis, Gamma gamma, std::span<const NamedField> inputs,
                          std::span<const double> lambdas, const ExperimentOptions& opt = {});

// Per p, max ||M^gamma f||_p / ||f||_p, checked against (C_est p)^(1/p). Without
// c_est the exact weak-type constant of the same inputs is used.
Report lp_bound(const Basis& basis, Gamma gamma, std::span<const double> ps,
                std::span<const NamedField> inputs, std::optional<double> c_est = std::nullopt,
                const ExperimentOptions& opt = {});

// k -> mu({M^gamma f_k > lambda}) along a sequence with ||f_k||_p -> 0.
Report continuity_in_measure(const Basis& basis, Gamma gamma, double lambda, double p,
                             std::span<const NamedField> sequence,
                             const ExperimentOptions& opt = {});

// Fraction of points where M^gamma f exceeds `threshold`.
Report finiteness_scan(const Basis& basis, Gamma gamma, std::span<const NamedField> inputs,
                       double threshold, const ExperimentOptions& opt = {});

}  // namespace medmax
