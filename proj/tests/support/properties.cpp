#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "medmax/hajlasz.hpp"
#include "medmax/maximal.hpp"
#include "oracles.hpp"

namespace medmax::props {

namespace {

struct Instance {
  Space space;
  Field f;
  MSet a;
};

Instance random_instance(oracle::Dyadic& gen, int spread) {
  const int n = gen.uniform(1, 20);
  std::vector<std::vector<double>> pts;
  std::vector<double> w, v;
  for (int i = 0; i < n; ++i) {
    pts.push_back({static_cast<double>(i)});
    w.push_back(gen.weight());
    v.push_back(gen.value(spread));
  }
  std::vector<char> mask(n, 0);
  mask[gen.uniform(0, n - 1)] = 1;
  for (auto& c : mask)
    if (gen.uniform(0, 1)) c = 1;
  return {Space::cloud(pts, w), Field(v), MSet::from_mask(mask)};
}

std::string describe(const char* what, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": " << lhs << " vs " << rhs;
  return os.str();
}

double med(const MedianKernel& k, const Instance& in, const Field& f, const MSet& a, double g) {
  return gamma_median_with(k, in.space, f, a, Gamma(g));
}

Space random_grid(oracle::Dyadic& gen, bool allow_1d) {
  if (allow_1d && gen.uniform(0, 3) == 0) return Space::grid({gen.uniform(2, 24)}, 0.125);
  return Space::grid({gen.uniform(2, 7), gen.uniform(2, 7)}, 0.125);
}

BasisFamily random_box_family(oracle::Dyadic& gen, const Space& space, bool rotated) {
  const int pick = gen.uniform(0, rotated && space.dim() == 2 ? 3 : 2);
  switch (pick) {
    case 0: return BasisFamily::cubes();
    case 1: return BasisFamily::axis_rects(gen.uniform(1, 3));
    case 2: return BasisFamily::dyadic_cubes();
    default: return BasisFamily::rotated_rects(gen.uniform(1, 6), gen.uniform(1, 4));
  }
}

Space random_cloud(oracle::Dyadic& gen, int n) {
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    pts.push_back({gen.real(0.0, 1.0), gen.real(0.0, 1.0)});
    w.push_back(gen.weight());
  }
  return Space::cloud(pts, w);
}

Field random_field(oracle::Dyadic& gen, std::size_t n, bool continuous) {
  std::vector<double> v(n);
  for (auto& x : v) x = continuous ? gen.real(-2.0, 2.0) : gen.value(1);
  return Field(v);
}

}  // namespace

double nonstrict_tie_median(std::span<const double> v, std::span<const double> w, double g) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] > v[b]; });
  double total = 0;
  for (double x : w) total += x;
  double above = 0, result = v[idx[0]];
  for (std::size_t k = 0; k < idx.size();) {
    const double cur = v[idx[k]];
    if (!(above <= g * total)) break;
    result = cur;
    while (k < idx.size() && v[idx[k]] == cur) above += w[idx[k++]];
  }
  return result;
}

std::vector<Outcome> median_properties(std::size_t trials, std::uint64_t seed,
                                       const MedianKernel& kernel) {
  std::vector<Outcome> out(8);
  out[0].anchor = "m^γ nonincreasing in γ";
  out[1].anchor = "m^γ monotone in f";
  out[2].anchor = "m^γ_f(A) <= m^{γ/C}_f(B)";
  out[3].anchor = "m^γ_{f+c} = m^γ_f + c";
  out[4].anchor = "m^γ_{cf} = c m^γ_f";
  out[5].anchor = "|m^γ_f| <= m^{min(γ,1-γ)}_{|f|}";
  out[6].anchor = "m^γ_{f+g} <= m^{γ1}_f + m^{γ2}_g";
  out[7].anchor = "m^γ_{|f|} <= (γ^-1 avg |f|^p)^{1/p}";
  oracle::Dyadic gen(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    auto in = random_instance(gen, 1 + static_cast<int>(t % 4));
    const Space& sp = in.space;
    const std::size_t n = sp.size();
    const double g = gen.gamma();
    const double m = med(kernel, in, in.f, in.a, g);

    {  // 1
      const double g2 = std::max(g, gen.gamma());
      const double m2 = med(kernel, in, in.f, in.a, g2);
      ++out[0].trials;
      if (!(m >= m2)) out[0].fail(describe("gamma order", m, m2));
    }
    {  // 2
      std::vector<double> gv(n);
      for (Index i = 0; i < n; ++i) gv[i] = in.f[i] + gen.uniform(0, 8) / 8.0;
      const double mg = med(kernel, in, Field(gv), in.a, g);
      ++out[1].trials;
      if (!(m <= mg)) out[1].fail(describe("f <= g", m, mg));
    }
    {  // 3
      std::vector<char> bm = in.a.mask();
      for (auto& c : bm)
        if (gen.uniform(0, 2) == 0) c = 1;
      const MSet b = MSet::from_mask(bm);
      const double ratio = measure(sp, b) / measure(sp, in.a);
      double c = 1.0;
      while (c < ratio) c *= 2.0;
      const double mb = med(kernel, in, in.f, b, g / c);
      ++out[2].trials;
      if (!(m <= mb)) out[2].fail(describe("A in B", m, mb));
    }
    {  // 4
      const double c = gen.value(4);
      const double ms = med(kernel, in, in.f.shifted(c), in.a, g);
      ++out[3].trials;
      if (ms != m + c) out[3].fail(describe("shift", ms, m + c));
    }
    {  // 5
      const double c = gen.uniform(1, 64) / 8.0;
      const double ms = med(kernel, in, in.f.scaled(c), in.a, g);
      ++out[4].trials;
      if (ms != c * m) out[4].fail(describe("scale", ms, c * m));
    }
    {  // 6
      const double ma = med(kernel, in, in.f.abs(), in.a, std::min(g, 1.0 - g));
      ++out[5].trials;
      if (!(std::abs(m) <= ma)) out[5].fail(describe("abs", std::abs(m), ma));
    }
    {  // 7
      const int k = gen.uniform(2, 63);
      const int j = gen.uniform(1, k - 1);
      const double g1 = j / 64.0, g2 = (k - j) / 64.0;
      const Field other = random_field(gen, n, false);
      const double lhs = med(kernel, in, in.f.plus(other), in.a, k / 64.0);
      const double rhs = med(kernel, in, in.f, in.a, g1) + med(kernel, in, other, in.a, g2);
      ++out[6].trials;
      if (!(lhs <= rhs)) out[6].fail(describe("sum", lhs, rhs));
    }
    {  // 8
      const double ma = med(kernel, in, in.f.abs(), in.a, g);
      for (double p : {0.5, 1.0, 2.0}) {
        double num = 0.0, den = 0.0;
        for (Index i : in.a.members()) {
          num += std::pow(std::abs(in.f[i]), p) * sp.weight(i);
          den += sp.weight(i);
        }
        const double bound = std::pow(num / den / g, 1.0 / p);
        ++out[7].trials;
        if (!(ma <= bound * (1.0 + 0x1p-40))) out[7].fail(describe("chebyshev", ma, bound));
      }
    }
  }
  return out;
}

Outcome median_oracle(std::size_t trials, std::uint64_t seed, const MedianKernel& kernel) {
  Outcome o;
  o.anchor = "m^γ_f(A) = inf{a : μ(f > a) < γμ(A)}";
  oracle::Dyadic gen(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    auto in = random_instance(gen, 1 + static_cast<int>(t % 4));
    const double g = gen.gamma();
    const double got = med(kernel, in, in.f, in.a, g);
    const double want = oracle::median_scan(in.space, in.f, in.a, g);
    ++o.trials;
    if (got != want) o.fail(describe("median", got, want));
  }
  return o;
}

Outcome indicator_closed_form(std::size_t trials, std::uint64_t seed, const MedianKernel& kernel) {
  Outcome o;
  o.anchor = "m^γ_{χ_A}";
  oracle::Dyadic gen(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    auto in = random_instance(gen, 1);
    std::vector<double> v(in.space.size(), 0.0);
    for (Index i = 0; i < v.size(); ++i) v[i] = gen.uniform(0, 1);
    const Field chi(v);
    double inside = 0.0;
    for (Index i : in.a.members())
      if (v[i] == 1.0) inside += in.space.weight(i);
    const double ratio = inside / measure(in.space, in.a);
    // a random level and, when admissible, the boundary level gamma == ratio
    std::vector<double> levels{gen.gamma()};
    if (ratio > 0.0 && ratio < 1.0) levels.push_back(ratio);
    for (double g : levels) {
      const double got = med(kernel, in, chi, in.a, g);
      const int want = indicator_median(ratio, Gamma(g));
      ++o.trials;
      if (got != want) o.fail(describe("indicator", got, want));
    }
  }
  return o;
}

Outcome levelset_identity(std::size_t trials, std::uint64_t seed) {
  Outcome o;
  o.anchor = "M^γ f > λ iff M χ_{|f|>λ} > γ";
  oracle::Dyadic gen(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const bool balls = t % 4 == 3;
    const Space sp = balls ? random_cloud(gen, gen.uniform(2, 14)) : random_grid(gen, true);
    const BasisFamily fam =
        balls ? BasisFamily::balls() : random_box_family(gen, sp, true);
    const Basis basis(sp, fam);
    const Window w{0.0, sp.diameter() * gen.real(0.3, 1.2) + sp.resolution() * 1.5};
    const auto sets = enumerate_collection(basis, w, 1u << 30);
    const Field f = random_field(gen, sp.size(), true);
    const Gamma g(gen.real(0.02, 0.98));
    const Field mg = median_maximal(sp, sets, f, g);
    std::vector<double> levels;
    for (double v : f.values()) levels.push_back(std::abs(v));
    levels.push_back(0.0);
    levels.push_back(gen.real(0.0, 2.0));
    for (double lambda : levels) {
      const Field chi = Field::indicator(abs_superlevel(f, lambda));
      const Field mchi = avg_maximal(sp, sets, chi);
      ++o.trials;
      for (Index x = 0; x < sp.size(); ++x)
        if ((mg[x] > lambda) != (mchi[x] > g.value())) {
          o.fail(describe("level set", mg[x], lambda));
          break;
        }
    }
  }
  return o;
}

Outcome sandwich(std::size_t trials, std::uint64_t seed) {
  Outcome o;
  o.anchor = "M^γ_B <= M^γ_B' <= M^{γ/2}_B";
  oracle::Dyadic gen(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const bool balls = t % 3 == 2;
    const Space sp = balls ? random_cloud(gen, gen.uniform(2, 12)) : random_grid(gen, true);
    const BasisFamily fam = balls ? BasisFamily::balls() : random_box_family(gen, sp, true);
    const Basis basis(sp, fam);
    const Window w{0.0, sp.diameter() * gen.real(0.3, 1.2) + sp.resolution() * 1.5};
    const auto base = enumerate_collection(basis, w, 1u << 30);
    const auto refined = countable_refinement(sp, base);
    const Field f = random_field(gen, sp.size(), gen.uniform(0, 1) == 1);
    const double gv = gen.real(0.02, 0.98);
    const Field lo = median_maximal(sp, base, f, Gamma(gv));
    const Field mid = median_maximal(sp, refined, f, Gamma(gv));
    const Field hi = median_maximal(sp, base, f, Gamma(gv / 2));
    ++o.trials;
    for (Index x = 0; x < sp.size(); ++x)
      if (!(lo[x] <= mid[x] && mid[x] <= hi[x])) {
        o.fail(describe("sandwich", mid[x], lo[x]));
        break;
      }
  }
  return o;
}

Outcome engine_agreement(std::size_t trials, std::uint64_t seed) {
  Outcome o;
  o.anchor = "sweep engine = per-point engine";
  oracle::Dyadic gen(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const Space sp = random_grid(gen, true);
    const Basis basis(sp, random_box_family(gen, sp, true));
    MaximalOptions pp, sw;
    pp.engine = Engine::per_point;
    sw.engine = Engine::sweep;
    pp.budget = 1u << 30;
    pp.window = sw.window = Window{0.0, sp.diameter() * gen.real(0.2, 1.2) + sp.resolution() * 1.5};
    const Field f = random_field(gen, sp.size(), gen.uniform(0, 1) == 1);
    const Gamma g(gen.uniform(1, 63) / 64.0);
    ++o.trials;
    try {
      const auto a = median_maximal(basis, f, g, pp).values;
      const auto b = median_maximal(basis, f, g, sw).values;
      const auto c = avg_maximal(basis, f, pp).values;
      const auto d = avg_maximal(basis, f, sw).values;
      const double lambda = std::abs(f[gen.uniform(0, static_cast<int>(sp.size()) - 1)]);
      const auto e = median_superlevel(basis, f, g, lambda, pp);
      const auto s = median_superlevel(basis, f, g, lambda, sw);
      const std::vector<double> scales{pp.window.hi};
      const auto l1 = limsup_liminf_median(basis, f, g, scales, pp);
      const auto l2 = limsup_liminf_median(basis, f, g, scales, sw);
      for (Index x = 0; x < sp.size(); ++x) {
        if (a[x] != b[x]) {
          o.fail(describe("median", a[x], b[x]));
          break;
        }
        if (std::abs(c[x] - d[x]) > 1e-12 * (1 + std::abs(c[x]))) {
          o.fail(describe("average", c[x], d[x]));
          break;
        }
        if (l1.limsup[x] != l2.limsup[x] || l1.liminf[x] != l2.liminf[x]) {
          o.fail(describe("limsup/liminf", l1.liminf[x], l2.liminf[x]));
          break;
        }
      }
      if (!(e == s)) o.fail("superlevel sets differ");
    } catch (const ResolutionExhausted&) {
      // rotated families may have no member at the smallest windows
      --o.trials;
    }
  }
  return o;
}

namespace {

Space battery_cloud(oracle::Dyadic& gen, int n) {
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    pts.push_back({gen.real(0, 1), gen.real(0, 1)});
    w.push_back(gen.weight());
  }
  return Space::cloud(pts, w);
}

void compare(Outcome& o, double got, double want, double tol, const char* what) {
  ++o.trials;
  const double err = std::abs(got - want);
  o.worst = std::max(o.worst, err);
  if (!(err <= tol)) o.fail(describe(what, got, want));
}

}  // namespace

std::vector<Outcome> solver_battery(std::uint64_t seed, double tol) {
  std::vector<Outcome> out(3);
  out[0].anchor = "inf ||g||_p over s-gradients";
  out[1].anchor = "inf ||(g_k)|| over fractional s-gradients";
  out[2].anchor = "C_F(E) = inf ||u||_F^p";
  oracle::Dyadic gen(seed);
  const double ps[] = {1.0, 1.5, 2.0, 3.0};
  const double qs[] = {1.0, 1.5, 2.0, 3.0, INFINITY};
  for (int i = 0; i < 20; ++i) {
    const Space sp = battery_cloud(gen, 2 + i % 3);
    std::vector<double> v(sp.size());
    for (auto& x : v) x = gen.real(-1, 1);
    const Field u(v);
    const FSpaceSpec spec{FSpaceKind::hajlasz, gen.real(0.2, 1.0), ps[i % 4]};
    compare(out[0], hajlasz_norm(sp, u, spec.s, spec.p).seminorm, oracle::seminorm_grid(sp, u, spec),
            tol, "hajlasz_norm");
  }
  for (int i = 0; i < 15; ++i) {
    const Space sp = battery_cloud(gen, 3);
    std::vector<double> v(sp.size());
    for (auto& x : v) x = gen.real(-1, 1);
    const Field u(v);
    const FSpaceSpec spec{i % 2 ? FSpaceKind::besov : FSpaceKind::triebel, gen.real(0.2, 0.9),
                          ps[i % 4], qs[i % 5]};
    compare(out[1], seq_norm(sp, u, spec).seminorm, oracle::seminorm_grid(sp, u, spec), tol,
            "seq_norm");
  }
  for (int i = 0; i < 15; ++i) {
    const Space sp = battery_cloud(gen, 3);
    const FSpaceKind kind = static_cast<FSpaceKind>(i % 3);
    const bool hz = kind == FSpaceKind::hajlasz;
    const FSpaceSpec spec{kind, hz ? gen.real(0.3, 1.0) : gen.real(0.2, 0.9), ps[1 + i % 3],
                          hz ? INFINITY : qs[1 + i % 3]};
    const MSet e = hz ? MSet(3, {static_cast<Index>(gen.uniform(0, 2))}) : MSet(3, {0, 2});
    const auto r = capacity(sp, e, spec);
    compare(out[2], r.value, oracle::capacity_grid(sp, e, spec, 0.5 * sp.resolution()), tol,
            "capacity");
  }
  return out;
}

}  // namespace medmax::props
