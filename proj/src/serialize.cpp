#include "medmax/serialize.hpp"

#include <cmath>

namespace medmax {

using nlohmann::json;

namespace {

std::vector<double> vec(const Field& f) { return {f.values().begin(), f.values().end()}; }

json finite_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

void reject_unknown(const json& j, std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw DomainError("unknown space key: " + it.key());
  }
}

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::chebyshev: return "chebyshev";
    case MetricKind::matrix: return "matrix";
  }
  return "?";
}

MetricKind metric_kind_from_string(std::string_view name) {
  if (name == "euclidean") return MetricKind::euclidean;
  if (name == "chebyshev") return MetricKind::chebyshev;
  if (name == "matrix") return MetricKind::matrix;
  throw DomainError("unknown metric: " + std::string(name));
}

json space_to_json(const Space& space) {
  if (space.is_grid()) {
    const auto& g = *space.grid_shape();
    return json{{"extent", g.extent},
                {"spacing", g.spacing},
                {"origin", g.origin},
                {"metric", to_string(space.metric())}};
  }
  std::vector<double> w(space.weights().begin(), space.weights().end());
  if (space.metric() == MetricKind::matrix)
    return json{{"distances", space.distance_matrix()}, {"weights", w}};
  std::vector<std::vector<double>> pts;
  for (Index i = 0; i < space.size(); ++i) {
    auto c = space.coords(i);
    pts.emplace_back(c.begin(), c.end());
  }
  return json{{"coordinates", pts}, {"weights", w}, {"metric", to_string(space.metric())}};
}

Space space_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("space must be a JSON object");
  try {
    const MetricKind metric = metric_kind_from_string(j.value("metric", std::string("euclidean")));
    if (j.contains("extent")) {
      reject_unknown(j, {"extent", "spacing", "origin", "metric", "dim"});
      const auto extent = j.at("extent").get<std::vector<int>>();
      if (j.contains("dim") && j.at("dim").get<std::size_t>() != extent.size())
        throw DomainError("dim does not match extent");
      int longest = 1;
      for (int e : extent) longest = std::max(longest, e);
      const double h = j.value("spacing", 1.0 / longest);
      return Space::grid(extent, h, metric, j.value("origin", std::vector<double>{}));
    }
    if (j.contains("coordinates")) {
      reject_unknown(j, {"coordinates", "weights", "metric", "dim"});
      const auto pts = j.at("coordinates").get<std::vector<std::vector<double>>>();
      auto w = j.value("weights", std::vector<double>(pts.size(), 1.0));
      return Space::cloud(pts, w, metric);
    }
    if (j.contains("distances")) {
      reject_unknown(j, {"distances", "weights", "metric"});
      const auto d = j.at("distances").get<std::vector<std::vector<double>>>();
      auto w = j.value("weights", std::vector<double>(d.size(), 1.0));
      return Space::from_distances(d, w);
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed space: ") + e.what());
  }
  throw DomainError("space needs extent, coordinates or distances");
}

json mset_to_json(const MSet& set) {
  return json(std::vector<Index>(set.members().begin(), set.members().end()));
}

MSet mset_from_json(const json& j, std::size_t universe) {
  if (!j.is_array()) throw DomainError("a set is a list of point indices");
  std::vector<Index> idx;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 0 ||
        v.get<unsigned long long>() >= universe)
      throw DomainError("set index out of range");
    idx.push_back(v.get<Index>());
  }
  return MSet(universe, std::move(idx));
}

json spec_to_json(const FSpaceSpec& spec) {
  return json{{"kind", to_string(spec.kind)},
              {"s", spec.s},
              {"p", spec.p},
              {"q", finite_or_inf(spec.q)}};
}

json norm_problem_to_json(const Space& space, const Field& u, const FSpaceSpec& spec,
                          const NormResult& r) {
  json out{{"space", space_to_json(space)},
           {"u", vec(u)},
           {"spec", spec_to_json(spec)},
           {"objective", r.seminorm},
           {"lp_u", r.lp_u},
           {"norm", r.norm},
           {"feasibility_residual", r.residual},
           {"converged", r.converged}};
  if (spec.kind == FSpaceKind::hajlasz) {
    out["solution"] = json{{"g", vec(r.g)}};
  } else {
    json seq = json::array();
    for (int k = r.seq.k_min; k <= r.seq.k_max; ++k)
      seq.push_back(json{{"k", k}, {"g", vec(r.seq.at(k))}});
    out["solution"] = json{{"g_k", seq}};
  }
  return out;
}

}  // namespace medmax
