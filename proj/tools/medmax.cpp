// medmax: configuration-driven runs of the maximal-function and capacity
// experiments, plus the property suites.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "medmax/experiments.hpp"
#include "medmax/hajlasz.hpp"
#include "medmax/serialize.hpp"
#include "medmax/util.hpp"
#include "support/properties.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace medmax;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kResourceCap = 3, kPropertyFailure = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PropertyFailure : std::runtime_error {
  std::vector<std::string> anchors;
  PropertyFailure(std::string msg, std::vector<std::string> a)
      : std::runtime_error(std::move(msg)), anchors(std::move(a)) {}
};

int emit_error(int code, const std::string& kind, const std::string& message,
               const json& extra = json::object()) {
  json e{{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) e[it.key()] = it.value();
  std::cout << e.dump() << "\n";
  return code;
}

// ---------------------------------------------------------------- config

const std::vector<std::string> kKnownKeys = {
    "space",  "family",  "gamma",  "lambda",   "p",      "q",     "s",         "scales",
    "seed",   "corpus",  "inputs", "tol",      "margin", "budget", "engine",   "threshold",
    "steps",  "kind",    "u",      "set",      "rho",    "restricted", "size_cap", "c_est",
    "variant", "families", "chain", "count",   "limsup_scale", "workers", "strict", "out"};

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  return j;
}

void check_keys(const json& cfg) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), it.key()) == kKnownKeys.end())
      throw UsageError("unknown config key: " + it.key());
}

json as_list(const json& v) { return v.is_array() ? v : json::array({v}); }

double number(const json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return INFINITY;
  }
  throw UsageError(std::string(key) + " must be a number");
}

double get_num(const json& cfg, const char* key, double def) {
  return cfg.contains(key) ? number(cfg.at(key), key) : def;
}

std::vector<double> get_nums(const json& cfg, const char* key, std::vector<double> def) {
  if (!cfg.contains(key)) return def;
  std::vector<double> out;
  for (const auto& v : as_list(cfg.at(key))) out.push_back(number(v, key));
  return out;
}

template <class T>
T get_as(const json& cfg, const char* key, T def) {
  if (!cfg.contains(key)) return def;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key ") + key + " has the wrong type");
  }
}

// Command-line flags that override config keys when given explicitly.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  void nums(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<std::vector<std::string>>();
    add(app_->add_option(flag, *store, help)->delimiter(','), [store, key](json& cfg) {
      json list = json::array();
      for (const auto& s : *store) list.push_back(parse_number(s, key));
      cfg[key] = list.size() == 1 ? list[0] : list;
    });
  }
  void num(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<std::string>();
    add(app_->add_option(flag, *store, help),
        [store, key](json& cfg) { cfg[key] = parse_number(*store, key); });
  }
  void integer(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<long long>(0);
    add(app_->add_option(flag, *store, help), [store, key](json& cfg) { cfg[key] = *store; });
  }
  void text(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<std::string>();
    add(app_->add_option(flag, *store, help), [store, key](json& cfg) { cfg[key] = *store; });
  }
  void texts(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<std::vector<std::string>>();
    add(app_->add_option(flag, *store, help)->delimiter(','),
        [store, key](json& cfg) { cfg[key] = *store; });
  }
  void indices(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<std::vector<long long>>();
    add(app_->add_option(flag, *store, help)->delimiter(','),
        [store, key](json& cfg) { cfg[key] = *store; });
  }
  void boolean(const std::string& flag, const std::string& key, const std::string& help) {
    auto store = std::make_shared<bool>(false);
    add(app_->add_option(flag, *store, help), [store, key](json& cfg) { cfg[key] = *store; });
  }
  // --grid 64x64 and --spacing fill the space object.
  void grid() {
    auto g = std::make_shared<std::string>();
    add(app_->add_option("--grid", *g, "lattice extent, e.g. 256x256 (unit square by default)"),
        [g](json& cfg) {
          json extent = json::array();
          std::stringstream ss(*g);
          std::string part;
          while (std::getline(ss, part, 'x')) {
            try {
              std::size_t used = 0;
              const int n = std::stoi(part, &used);
              if (used != part.size() || n < 1) throw std::invalid_argument(part);
              extent.push_back(n);
            } catch (const std::exception&) {
              throw UsageError("--grid expects NxM..., got " + *g);
            }
          }
          cfg["space"] = json{{"extent", extent}};
        });
    auto h = std::make_shared<double>(0.0);
    add(app_->add_option("--spacing", *h, "lattice spacing"), [h](json& cfg) {
      if (!cfg.contains("space") || !cfg["space"].is_object())
        throw UsageError("--spacing needs a grid space");
      cfg["space"]["spacing"] = *h;
    });
  }
  // --family NAME, --eccentricity and --angles fill the family descriptor.
  void family() {
    auto name = std::make_shared<std::string>();
    add(app_->add_option("--family", *name,
                         "basis family: balls, cubes, axis_rects, rotated_rects, dyadic_cubes, "
                         "intervals1d"),
        [name](json& cfg) { cfg["family"] = json{{"kind", *name}}; });
    auto ecc = std::make_shared<double>(1.0);
    add(app_->add_option("--eccentricity", *ecc, "rectangle eccentricity"),
        [ecc](json& cfg) { family_object(cfg)["eccentricity"] = *ecc; });
    auto angles = std::make_shared<int>(32);
    add(app_->add_option("--angles", *angles, "rotated_rects angle count"),
        [angles](json& cfg) { family_object(cfg)["angles"] = *angles; });
  }

  // Explicit flags, in registration order, on top of the config.
  void apply(json& cfg) const {
    for (const auto& [opt, fn] : flags_)
      if (opt->count() > 0) fn(cfg);
  }

 private:
  static json parse_number(const std::string& s, const std::string& key) {
    if (s == "inf" || s == "infinity") return "inf";
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError("--" + key + " expects numbers, got " + s);
    }
  }
  static json& family_object(json& cfg) {
    if (!cfg.contains("family")) cfg["family"] = json{{"kind", "cubes"}};
    if (cfg["family"].is_string()) cfg["family"] = json{{"kind", cfg["family"]}};
    return cfg["family"];
  }
  void add(CLI::Option* opt, std::function<void(json&)> fn) { flags_.emplace_back(opt, std::move(fn)); }

  CLI::App* app_;
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> flags_;
};

// ---------------------------------------------------------------- building blocks

Space build_space(const json& cfg) {
  if (!cfg.contains("space")) throw UsageError("config needs a space (or pass --grid)");
  return space_from_json(cfg.at("space"));
}

BasisFamily build_family(const json& cfg, const Space& space) {
  if (!cfg.contains("family"))
    return space.is_grid() ? BasisFamily::cubes() : BasisFamily::balls();
  const json& f = cfg.at("family");
  if (f.is_string()) return family_from_json(json{{"kind", f}}.dump());
  if (!f.is_object()) throw UsageError("family must be a name or a descriptor object");
  return family_from_json(f.dump());
}

ExperimentOptions build_options(const json& cfg) {
  ExperimentOptions o;
  o.tol = get_num(cfg, "tol", o.tol);
  o.margin = get_as<int>(cfg, "margin", 0);
  o.maximal.budget = get_as<std::size_t>(cfg, "budget", o.maximal.budget);
  const auto engine = get_as<std::string>(cfg, "engine", "automatic");
  if (engine == "automatic") o.maximal.engine = Engine::automatic;
  else if (engine == "per_point") o.maximal.engine = Engine::per_point;
  else if (engine == "sweep") o.maximal.engine = Engine::sweep;
  else throw UsageError("engine must be automatic, per_point or sweep");
  if (o.margin < 0) throw UsageError("margin must be nonnegative");
  return o;
}

CorpusSpec build_corpus(const json& cfg, std::uint64_t seed) {
  json c = cfg.value("corpus", json::object());
  if (!c.is_object()) throw UsageError("corpus must be an object");
  if (!c.contains("seed")) c["seed"] = seed;
  return corpus_from_json(c);
}

std::vector<NamedField> select_inputs(const std::vector<NamedField>& corpus, const std::string& which) {
  std::vector<NamedField> out;
  for (const auto& f : corpus) {
    const bool indicator = f.name.rfind("rect", 0) == 0 || f.name.rfind("union", 0) == 0;
    if (which == "all" || (which == "indicators" && indicator) ||
        (which == "lipschitz" && std::isfinite(f.lipschitz)))
      out.push_back(f);
  }
  if (which != "all" && which != "indicators" && which != "lipschitz")
    throw UsageError("inputs must be all, indicators or lipschitz");
  if (out.empty()) throw UsageError("the corpus has no " + which + " inputs");
  return out;
}

Gamma gamma_of(double g) {
  if (!(g > 0.0 && g < 1.0)) throw UsageError("gamma must lie in (0, 1)");
  return Gamma(g);
}

// Dyadic scales 2^-k from half the diameter down to twice the resolution.
std::vector<double> default_scales(const Space& space) {
  std::vector<double> out;
  for (double s = std::exp2(std::floor(std::log2(space.diameter() / 2))); s >= 2 * space.resolution();
       s /= 2)
    out.push_back(s);
  if (out.empty()) out.push_back(space.diameter());
  return out;
}

FSpaceSpec build_spec(const json& cfg) {
  FSpaceSpec spec;
  spec.kind = fspace_kind_from_string(get_as<std::string>(cfg, "kind", "hajlasz"));
  spec.s = get_num(cfg, "s", spec.kind == FSpaceKind::hajlasz ? 1.0 : 0.5);
  spec.p = get_num(cfg, "p", 2.0);
  spec.q = get_num(cfg, "q", spec.kind == FSpaceKind::hajlasz ? INFINITY : 2.0);
  spec.validate();
  return spec;
}

std::pair<std::vector<double>, std::vector<double>> bounding_box(const Space& space) {
  if (space.dim() == 0) throw UsageError("this experiment needs coordinates");
  std::vector<double> lo(space.dim(), INFINITY), hi(space.dim(), -INFINITY);
  for (Index i = 0; i < space.size(); ++i) {
    auto c = space.coords(i);
    for (int d = 0; d < space.dim(); ++d) {
      lo[d] = std::min(lo[d], c[d]);
      hi[d] = std::max(hi[d], c[d]);
    }
  }
  return {lo, hi};
}

// Jobs run on a small thread pool; results keep their submission order.
std::vector<Report> run_jobs(const std::vector<std::function<Report()>>& jobs, int workers) {
  std::vector<Report> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        out[i] = jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

int default_workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------- subcommands

std::vector<std::function<Report()>> plan_density(const json& cfg, const Space& space, const Basis& basis,
                                                  std::uint64_t seed) {
  const auto corpus = make_corpus(space, build_corpus(cfg, seed));
  std::vector<MSet> sets;
  for (const auto& f : select_inputs(corpus, "indicators")) sets.push_back(superlevel(f.field, 0.5));
  const auto scales = get_nums(cfg, "scales", default_scales(space));
  const auto opt = build_options(cfg);
  return {[&basis, sets, scales, opt] { return density_test(basis, sets, scales, opt); }};
}

std::vector<std::function<Report()>> plan_lebesgue(const json& cfg, const Space& space,
                                                   const Basis& basis, std::uint64_t seed) {
  const auto inputs = select_inputs(make_corpus(space, build_corpus(cfg, seed)),
                                    get_as<std::string>(cfg, "inputs", "lipschitz"));
  const auto gammas = get_nums(cfg, "gamma", {0.25, 0.5});
  for (double g : gammas) gamma_of(g);
  const auto scales = get_nums(cfg, "scales", default_scales(space));
  const auto opt = build_options(cfg);
  std::vector<std::function<Report()>> jobs;
  for (const auto& f : inputs)
    jobs.push_back([&basis, f, gammas, scales, opt] {
      return lebesgue_point_test(basis, f, gammas, scales, opt);
    });
  return jobs;
}

std::vector<std::function<Report()>> plan_weaktype(const json& cfg, const Space& space,
                                                   const Basis& basis, std::uint64_t seed) {
  const auto inputs = select_inputs(make_corpus(space, build_corpus(cfg, seed)),
                                    get_as<std::string>(cfg, "inputs", "indicators"));
  const auto lambdas = get_nums(cfg, "lambda", {});
  const auto opt = build_options(cfg);
  std::vector<std::function<Report()>> jobs;
  for (double g : get_nums(cfg, "gamma", {0.5})) {
    const Gamma gamma = gamma_of(g);
    jobs.push_back([&basis, gamma, inputs, lambdas, opt] {
      return weak_type_constant(basis, gamma, inputs, lambdas, opt);
    });
  }
  return jobs;
}

std::vector<std::function<Report()>> plan_lpbound(const json& cfg, const Space& space,
                                                  const Basis& basis, std::uint64_t seed) {
  const auto inputs = select_inputs(make_corpus(space, build_corpus(cfg, seed)),
                                    get_as<std::string>(cfg, "inputs", "all"));
  const auto ps = get_nums(cfg, "p", {1.0, 2.0});
  std::optional<double> c_est;
  if (cfg.contains("c_est")) c_est = get_num(cfg, "c_est", 0.0);
  const auto opt = build_options(cfg);
  std::vector<std::function<Report()>> jobs;
  for (double g : get_nums(cfg, "gamma", {0.5})) {
    const Gamma gamma = gamma_of(g);
    jobs.push_back([&basis, gamma, ps, inputs, c_est, opt] {
      return lp_bound(basis, gamma, ps, inputs, c_est, opt);
    });
  }
  return jobs;
}

std::vector<std::function<Report()>> plan_continuity(const json& cfg, const Space& space,
                                                     const Basis& basis, std::uint64_t) {
  // Indicators of centered boxes whose sides halve at every step.
  const int steps = get_as<int>(cfg, "steps", 6);
  if (steps < 2) throw UsageError("steps must be at least 2");
  const auto [lo, hi] = bounding_box(space);
  std::vector<NamedField> seq;
  for (int k = 0; k < steps; ++k) {
    std::vector<double> a(lo.size()), b(lo.size());
    for (std::size_t d = 0; d < lo.size(); ++d) {
      const double mid = 0.5 * (lo[d] + hi[d]), half = 0.25 * (hi[d] - lo[d]) * std::exp2(-k);
      a[d] = mid - half;
      b[d] = mid + half;
    }
    seq.push_back({"box" + std::to_string(k), Field::indicator(box_set(space, a, b))});
  }
  const double lambda = get_num(cfg, "lambda", 0.5), p = get_num(cfg, "p", 1.0);
  const auto opt = build_options(cfg);
  std::vector<std::function<Report()>> jobs;
  for (double g : get_nums(cfg, "gamma", {0.5})) {
    const Gamma gamma = gamma_of(g);
    jobs.push_back([&basis, gamma, lambda, p, seq, opt] {
      return continuity_in_measure(basis, gamma, lambda, p, seq, opt);
    });
  }
  return jobs;
}

std::vector<std::function<Report()>> plan_finiteness(const json& cfg, const Space& space,
                                                     const Basis& basis, std::uint64_t seed) {
  const auto inputs = select_inputs(make_corpus(space, build_corpus(cfg, seed)),
                                    get_as<std::string>(cfg, "inputs", "all"));
  const double threshold = get_num(cfg, "threshold", 1e6);
  const auto opt = build_options(cfg);
  std::vector<std::function<Report()>> jobs;
  for (double g : get_nums(cfg, "gamma", {0.5})) {
    const Gamma gamma = gamma_of(g);
    jobs.push_back([&basis, gamma, inputs, threshold, opt] {
      return finiteness_scan(basis, gamma, inputs, threshold, opt);
    });
  }
  return jobs;
}

SolverOptions solver_options(const json& cfg) {
  SolverOptions s;
  s.size_cap = get_as<std::size_t>(cfg, "size_cap", s.size_cap);
  return s;
}

Report run_norm(const json& cfg, const Space& space) {
  const FSpaceSpec spec = build_spec(cfg);
  if (!cfg.contains("u")) throw UsageError("hajlasz-norm needs u (one value per point)");
  const auto u = get_nums(cfg, "u", {});
  if (u.size() != space.size()) throw UsageError("u needs one value per point");
  const SolverOptions sopt = solver_options(cfg);
  if (space.size() > sopt.size_cap)
    throw SizeCapExceeded("solver is capped at " + std::to_string(sopt.size_cap) + " points");
  const Field uf(u);
  const NormResult r = seq_norm(space, uf, spec, sopt);
  Report rep;
  rep.kind = "hajlasz_norm";
  rep.inputs = json{{"space", space_to_json(space)}, {"u", u}, {"spec", spec_to_json(spec)}};
  rep.summary = json{{"seminorm", r.seminorm},
                     {"lp_u", r.lp_u},
                     {"norm", r.norm},
                     {"feasibility_residual", r.residual},
                     {"problem", norm_problem_to_json(space, uf, spec, r)}};
  rep.verdicts["converged"] = r.converged;
  rep.table.columns = {"k", "point", "g"};
  if (spec.kind == FSpaceKind::hajlasz) {
    for (Index x = 0; x < space.size(); ++x) rep.table.rows.push_back(json::array({"all", x, r.g[x]}));
  } else {
    for (int k = r.seq.k_min; k <= r.seq.k_max; ++k)
      for (Index x = 0; x < space.size(); ++x)
        rep.table.rows.push_back(json::array({k, x, r.seq.at(k)[x]}));
  }
  return rep;
}

CapacityOptions capacity_options(const json& cfg) {
  CapacityOptions o;
  if (cfg.contains("rho")) o.rho = get_num(cfg, "rho", 0.0);
  o.restricted = get_as<bool>(cfg, "restricted", true);
  o.size_cap = get_as<std::size_t>(cfg, "size_cap", o.size_cap);
  o.solver = solver_options(cfg);
  return o;
}

Report run_capacity(const json& cfg, const Space& space) {
  const FSpaceSpec spec = build_spec(cfg);
  if (!cfg.contains("set")) throw UsageError("capacity needs set (a list of point indices)");
  const MSet e = mset_from_json(as_list(cfg.at("set")), space.size());
  const auto opt = capacity_options(cfg);
  const auto r = capacity(space, e, spec, opt);
  Report rep;
  rep.kind = "capacity";
  rep.inputs = json{{"space", space_to_json(space)}, {"set", mset_to_json(e)}, {"spec", spec_to_json(spec)},
                    {"restricted", opt.restricted}};
  rep.summary = json{{"capacity", r.value},
                     {"lp_u", r.lp_u},
                     {"seminorm", r.seminorm},
                     {"feasibility_residual", r.residual},
                     {"neighborhood", mset_to_json(r.neighborhood)}};
  rep.verdicts["converged"] = r.converged;
  rep.table.columns = {"point", "u", "in_neighborhood"};
  const auto mask = r.neighborhood.mask();
  for (Index x = 0; x < space.size(); ++x)
    rep.table.rows.push_back(json::array({x, r.u[x], mask[x] ? 1 : 0}));
  return rep;
}

std::vector<MSet> random_subsets(std::mt19937_64& rng, std::size_t n, int count, int max_size) {
  std::vector<MSet> out;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<int> size(1, max_size);
  for (int i = 0; i < count; ++i) {
    std::vector<Index> idx;
    for (int k = size(rng); k > 0; --k) idx.push_back(static_cast<Index>(pick(rng)));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    out.emplace_back(n, idx);
  }
  return out;
}

std::vector<std::function<Report()>> plan_captests(const json& cfg, const Space& space,
                                                   const Basis& basis, std::uint64_t seed) {
  const FSpaceSpec spec = build_spec(cfg);
  const auto opt = capacity_options(cfg);
  if (space.size() > opt.size_cap)
    throw SizeCapExceeded("capacity solves are capped at " + std::to_string(opt.size_cap) + " points");
  const std::size_t n = space.size();
  std::mt19937_64 rng(mix_seed(seed, 7));
  const int count = get_as<int>(cfg, "count", 4);
  if (count < 1) throw UsageError("count must be positive");

  std::vector<std::vector<MSet>> families;
  if (cfg.contains("families")) {
    for (const auto& fam : cfg.at("families")) {
      std::vector<MSet> sets;
      for (const auto& s : fam) sets.push_back(mset_from_json(s, n));
      families.push_back(std::move(sets));
    }
  } else {
    for (int i = 0; i < count; ++i) families.push_back(random_subsets(rng, n, 2 + i % 2, 2));
  }

  std::vector<MSet> chain;
  if (cfg.contains("chain")) {
    for (const auto& s : cfg.at("chain")) chain.push_back(mset_from_json(s, n));
  } else {
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 1; k <= 4; ++k) {
      std::vector<Index> idx(perm.begin(), perm.begin() + std::max<std::size_t>(1, k * n / 4));
      std::sort(idx.begin(), idx.end());
      chain.emplace_back(n, idx);
    }
  }

  std::vector<NamedField> inputs;
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int i = 0; i < count; ++i) {
    std::vector<double> v(n);
    for (auto& x : v) x = val(rng);
    inputs.push_back({"u" + std::to_string(i), Field(v)});
  }
  const auto lambdas = get_nums(cfg, "lambda", {0.25, 0.5, 0.75});
  const Gamma gamma = gamma_of(get_num(cfg, "gamma", 0.5));
  std::optional<double> scale;
  if (cfg.contains("limsup_scale")) scale = get_num(cfg, "limsup_scale", 0.0);
  std::vector<WeakVariant> variants;
  if (cfg.contains("variant")) {
    for (const auto& v : as_list(cfg.at("variant")))
      variants.push_back(weak_variant_from_string(v.get<std::string>()));
  } else {
    variants = {WeakVariant::limsup_median, WeakVariant::limsup_average, WeakVariant::maximal};
  }

  std::vector<std::function<Report()>> jobs;
  jobs.push_back([&space, families, spec, opt] { return subadditivity_check(space, families, spec, opt); });
  if (spec.p > 1.0 && spec.q > 1.0)
    jobs.push_back([&space, chain, spec, opt] { return capacity_monotone_limit(space, chain, spec, opt); });
  for (auto v : variants)
    jobs.push_back([&basis, inputs, spec, gamma, lambdas, v, scale, opt] {
      return capacitary_weak_type(basis, inputs, spec, gamma, lambdas, v, scale, opt);
    });
  return jobs;
}

// ---------------------------------------------------------------- output

std::string provenance_line(const json& prov) { return "# " + prov.dump(); }

void write_outputs(const fs::path& out, const std::string& command, const json& cfg,
                   std::uint64_t seed, const std::vector<Report>& reports, json& files) {
  fs::create_directories(out / "tables");
  const json prov{{"command", command},
                  {"config_hash", hex64(fnv1a64(cfg.dump()))},
                  {"seed", seed},
                  {"version", kVersion}};
  json doc{{"provenance", prov}, {"config", cfg}, {"reports", json::array()}};
  std::map<std::string, int> used;
  for (const auto& r : reports) {
    doc["reports"].push_back(r.to_json());
    std::string stem = r.kind;
    if (r.inputs.contains("field")) stem += "_" + r.inputs["field"].get<std::string>();
    if (r.inputs.contains("gamma") && r.inputs["gamma"].is_number())
      stem += "_g" + format_double(r.inputs["gamma"].get<double>());
    if (r.inputs.contains("variant")) stem += "_" + r.inputs["variant"].get<std::string>();
    if (used[stem]++ > 0) stem += "_" + std::to_string(used[stem] - 1);
    const fs::path csv = out / "tables" / (stem + ".csv");
    std::ofstream f(csv, std::ios::binary);
    f << provenance_line(prov) << "\n";
    write_csv(f, r.table);
    if (!f) throw std::runtime_error("cannot write " + csv.string());
    files.push_back(csv.string());
  }
  const fs::path rj = out / "report.json";
  std::ofstream f(rj, std::ios::binary);
  f << doc.dump(2) << "\n";
  if (!f) throw std::runtime_error("cannot write " + rj.string());
  files.push_back(rj.string());
}

bool all_verdicts_hold(const std::vector<Report>& reports, std::vector<std::string>& failed) {
  for (const auto& r : reports)
    for (auto it = r.verdicts.begin(); it != r.verdicts.end(); ++it)
      if (it.value().is_boolean() && !it.value().get<bool>()) failed.push_back(r.kind + "." + it.key());
  return failed.empty();
}

// ---------------------------------------------------------------- verify

struct SuiteRow {
  std::string suite;
  props::Outcome outcome;
};

int run_verify(const std::string& suite, std::uint64_t seed, bool mutate_tie) {
  const std::vector<std::string> suites = {"all", "median", "levelset", "sandwich", "solver"};
  if (std::find(suites.begin(), suites.end(), suite) == suites.end())
    throw UsageError("unknown suite: " + suite + " (all, median, levelset, sandwich, solver)");
  const MedianKernel kernel = mutate_tie ? MedianKernel(props::nonstrict_tie_median)
                                         : MedianKernel(weighted_median);
  std::vector<SuiteRow> rows;
  const bool all = suite == "all";
  if (all || suite == "median") {
    for (auto& o : props::median_properties(1000, seed, kernel)) rows.push_back({"median", o});
    rows.push_back({"median", props::indicator_closed_form(1000, seed + 1, kernel)});
    rows.push_back({"median", props::median_oracle(1000, seed + 2, kernel)});
  }
  if (all || suite == "levelset") {
    rows.push_back({"levelset", props::levelset_identity(200, seed + 3)});
    rows.push_back({"levelset", props::engine_agreement(50, seed + 4)});
  }
  if (all || suite == "sandwich") rows.push_back({"sandwich", props::sandwich(100, seed + 5)});
  if (all || suite == "solver")
    for (auto& o : props::solver_battery(seed + 6)) rows.push_back({"solver", o});

  std::vector<std::string> failed;
  std::cout << std::left << std::setw(10) << "suite" << std::setw(8) << "result" << std::setw(8)
            << "trials" << std::setw(10) << "failures" << "anchor\n";
  for (const auto& r : rows) {
    const bool ok = r.outcome.ok();
    std::cout << std::left << std::setw(10) << r.suite << std::setw(8) << (ok ? "PASS" : "FAIL")
              << std::setw(8) << r.outcome.trials << std::setw(10) << r.outcome.failures
              << r.outcome.anchor;
    if (!ok && !r.outcome.first_failure.empty()) std::cout << "  [" << r.outcome.first_failure << "]";
    std::cout << "\n";
    if (!ok) failed.push_back(r.outcome.anchor);
  }
  if (!failed.empty()) throw PropertyFailure("property suite failed", failed);
  std::cout << json{{"status", "ok"}, {"suite", suite}, {"checks", rows.size()}}.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"median maximal functions, density bases and Hajlasz capacities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  struct Sub {
    CLI::App* app;
    std::unique_ptr<Flags> flags;
  };
  std::map<std::string, Sub> subs;
  std::string config_path, out_dir = "medmax_out";
  bool strict_flag = false;

  auto make = [&](const std::string& name, const std::string& help) -> Flags& {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON config; explicit flags override its keys");
    sub->add_option("-o,--out", out_dir, "output directory (report.json, tables/*.csv)");
    sub->add_flag("--strict", strict_flag, "exit 4 when any report verdict is false");
    auto flags = std::make_unique<Flags>(sub);
    flags->grid();
    flags->integer("--seed", "seed", "seed for the corpus and random batteries");
    flags->integer("--workers", "workers", "worker threads for independent jobs");
    Flags& ref = *flags;
    subs[name] = Sub{sub, std::move(flags)};
    return ref;
  };
  auto experiment = [&](const std::string& name, const std::string& help) -> Flags& {
    Flags& f = make(name, help);
    f.family();
    f.nums("--gamma", "gamma", "gamma value(s)");
    f.num("--tol", "tol", "comparison tolerance");
    f.integer("--margin", "margin", "ignore points this many cells from the grid edge");
    f.integer("--budget", "budget", "per-point set budget of the per-point engine");
    f.text("--engine", "engine", "automatic, per_point or sweep");
    f.text("--inputs", "inputs", "corpus selection: all, indicators or lipschitz");
    return f;
  };

  experiment("density", "failure fractions of indicator averages per scale")
      .nums("--scales", "scales", "decreasing diameter scales");
  {
    Flags& f = experiment("lebesgue", "Lebesgue-point failure fractions of median averages");
    f.nums("--scales", "scales", "decreasing diameter scales");
  }
  experiment("weaktype", "weak-type constant of the median maximal operator")
      .nums("--lambda", "lambda", "levels (default: every exact level)");
  {
    Flags& f = experiment("lpbound", "L^p ratios against the weak-type bound");
    f.nums("--p", "p", "exponents");
    f.num("--c-est", "c_est", "weak-type constant to test against");
  }
  {
    Flags& f = experiment("continuity", "superlevel measures along shrinking boxes");
    f.nums("--lambda", "lambda", "level");
    f.nums("--p", "p", "exponent of the reported norms");
    f.integer("--steps", "steps", "number of boxes");
  }
  experiment("finiteness", "fraction of points where M^gamma f exceeds a threshold")
      .num("--threshold", "threshold", "threshold");
  auto solver_flags = [](Flags& f) {
    f.text("--kind", "kind", "hajlasz, triebel or besov");
    f.num("--s", "s", "smoothness");
    f.num("--p", "p", "integrability exponent");
    f.num("--q", "q", "sequence exponent (inf allowed)");
    f.integer("--size-cap", "size_cap", "largest space the dense solver accepts");
  };
  {
    Flags& f = make("hajlasz-norm", "minimal (fractional) s-gradient norm of u");
    solver_flags(f);
    f.nums("--u", "u", "function values, one per point");
  }
  {
    Flags& f = make("capacity", "capacity of a set");
    solver_flags(f);
    f.indices("--set", "set", "point indices of E");
    f.num("--rho", "rho", "neighborhood radius (default half the resolution)");
    f.boolean("--restricted", "restricted", "restrict to 0 <= u <= 1 (default true)");
  }
  {
    Flags& f = make("captests", "subadditivity, monotone limits and capacitary weak type");
    solver_flags(f);
    f.family();
    f.nums("--gamma", "gamma", "gamma");
    f.nums("--lambda", "lambda", "levels");
    f.texts("--variant", "variant", "limsup_median, limsup_average, maximal");
    f.integer("--count", "count", "random families and inputs");
    f.num("--limsup-scale", "limsup_scale", "diameter bound of the limsup variants");
  }
  CLI::App* verify = app.add_subcommand("verify", "run the property suites");
  std::string suite = "all";
  std::uint64_t verify_seed = 1;
  std::string mutate;
  verify->add_option("suite", suite, "all, median, levelset, sandwich or solver");
  verify->add_option("--seed", verify_seed, "seed of the randomized suites");
  verify->add_option("--mutate", mutate, "inject a known bug; 'tie' swaps in a non-strict tie rule")
      ->check(CLI::IsMember({"tie"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error(kUsage, "usage", e.what());
  }

  try {
    if (verify->parsed()) return run_verify(suite, verify_seed, mutate == "tie");

    std::string command;
    Flags* flags = nullptr;
    for (auto& [name, s] : subs)
      if (s.app->parsed()) {
        command = name;
        flags = s.flags.get();
      }
    json cfg = json::object();
    if (!config_path.empty()) cfg = read_config(config_path);
    flags->apply(cfg);
    check_keys(cfg);
    if (cfg.contains("out") && subs[command].app->get_option("--out")->count() == 0)
      out_dir = get_as<std::string>(cfg, "out", out_dir);
    const bool strict = strict_flag || get_as<bool>(cfg, "strict", false);
    const auto seed = get_as<std::uint64_t>(cfg, "seed", 1);
    const int workers = get_as<int>(cfg, "workers", default_workers());
    if (workers < 1) throw UsageError("workers must be positive");

    // Everything is validated before any computation starts.
    const Space space = build_space(cfg);
    std::vector<Report> reports;
    if (command == "hajlasz-norm") {
      reports.push_back(run_norm(cfg, space));
    } else if (command == "capacity") {
      reports.push_back(run_capacity(cfg, space));
    } else {
      const Basis basis(space, build_family(cfg, space));
      std::vector<std::function<Report()>> jobs;
      if (command == "density") jobs = plan_density(cfg, space, basis, seed);
      else if (command == "lebesgue") jobs = plan_lebesgue(cfg, space, basis, seed);
      else if (command == "weaktype") jobs = plan_weaktype(cfg, space, basis, seed);
      else if (command == "lpbound") jobs = plan_lpbound(cfg, space, basis, seed);
      else if (command == "continuity") jobs = plan_continuity(cfg, space, basis, seed);
      else if (command == "finiteness") jobs = plan_finiteness(cfg, space, basis, seed);
      else if (command == "captests") jobs = plan_captests(cfg, space, basis, seed);
      reports = run_jobs(jobs, workers);
    }

    json files = json::array();
    write_outputs(out_dir, command, cfg, seed, reports, files);
    std::vector<std::string> failed;
    const bool held = all_verdicts_hold(reports, failed);
    json summary = json::array();
    for (const auto& r : reports) summary.push_back(json{{"kind", r.kind}, {"summary", r.summary}});
    if (strict && !held) throw PropertyFailure("report verdicts failed", failed);
    std::cout << json{{"status", "ok"}, {"command", command}, {"files", files}, {"failed_verdicts", failed}}
                     .dump()
              << "\n";
    return kOk;
  } catch (const UsageError& e) {
    return emit_error(kUsage, "usage", e.what());
  } catch (const SizeCapExceeded& e) {
    return emit_error(kResourceCap, "resource_cap", e.what());
  } catch (const PropertyFailure& e) {
    return emit_error(kPropertyFailure, "property_failure", e.what(), json{{"anchors", e.anchors}});
  } catch (const NonconvexProblem& e) {
    return emit_error(kUsage, "nonconvex", e.what());
  } catch (const DomainError& e) {
    return emit_error(kUsage, "usage", e.what());
  } catch (const ResolutionExhausted& e) {
    return emit_error(kUsage, "resolution", e.what());
  } catch (const OutOfDomain& e) {
    return emit_error(kUsage, "usage", e.what());
  } catch (const std::exception& e) {
    return emit_error(1, "internal", e.what());
  }
}
