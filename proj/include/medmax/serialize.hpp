#pragma once

#include "json.hpp"
#include "medmax/hajlasz.hpp"
#include "medmax/space.hpp"

namespace medmax {

// Space documents take one of three forms:
//   {"extent": [n0, ...], "spacing": h, "origin": [...], "metric": "euclidean"}
//   {"coordinates": [[...], ...], "weights": [...], "metric": "chebyshev"}
//   {"distances": [[...], ...], "weights": [...]}
// Unknown keys are rejected.
nlohmann::json space_to_json(const Space& space);
Space space_from_json(const nlohmann::json& j);

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(std::string_view name);

nlohmann::json mset_to_json(const MSet& set);
MSet mset_from_json(const nlohmann::json& j, std::size_t universe);

nlohmann::json spec_to_json(const FSpaceSpec& spec);

// {space, u, spec, solution g or (g_k), objective, feasibility residual}.
nlohmann::json norm_problem_to_json(const Space& space, const Field& u, const FSpaceSpec& spec,
                                    const NormResult& result);

}  // namespace medmax
