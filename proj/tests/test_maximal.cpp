#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "medmax/maximal.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace medmax;

namespace {

MaximalOptions exhaustive(Engine e, double hi) {
  MaximalOptions o;
  o.engine = e;
  o.budget = 1u << 30;
  o.window = Window{0.0, hi};
  return o;
}

// Brute-force sup over every rasterized member at every point.
Field brute_median_maximal(const Basis& b, const Field& f, double gamma, Window w) {
  const Space& s = b.space();
  std::vector<double> out(s.size());
  for (Index x = 0; x < s.size(); ++x) {
    double best = -1;
    for (const auto& m : b.members_at(x, w)) {
      const MSet set = b.rasterize(m);
      best = std::max(best, oracle::median_scan(s, f.abs(), set, gamma));
    }
    out[x] = best;
  }
  return Field(out);
}

}  // namespace

TEST(Maximal, ConstantField) {
  auto s = Space::grid({12, 10}, 0.125);
  for (auto fam : {BasisFamily::cubes(), BasisFamily::rotated_rects(4, 4)}) {
    Basis b(s, fam);
    auto m = median_maximal(b, Field::constant(s.size(), -1.5), Gamma(0.3), exhaustive(Engine::automatic, 0.9));
    for (double v : m.values.values()) EXPECT_EQ(v, 1.5);
    auto a = avg_maximal(b, Field::constant(s.size(), -1.5), exhaustive(Engine::automatic, 0.9));
    for (double v : a.values.values()) EXPECT_NEAR(v, 1.5, 1e-15);
  }
}

TEST(Maximal, IndicatorValuesAreBinary) {
  auto s = Space::grid({16, 16}, 1.0 / 16);
  std::vector<Index> m;
  for (Index i = 0; i < 256; i += 7) m.push_back(i);
  auto chi = Field::indicator(MSet(256, m));
  Basis b(s, BasisFamily::axis_rects(4));
  auto out = median_maximal(b, chi, Gamma(0.2), exhaustive(Engine::automatic, 0.5));
  for (double v : out.values.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Maximal, MatchesExhaustiveOracle) {
  oracle::Dyadic gen(41);
  for (int t = 0; t < 10; ++t) {
    auto s = Space::grid({gen.uniform(2, 6), gen.uniform(2, 6)}, 0.25);
    std::vector<double> v(s.size());
    for (auto& x : v) x = gen.value();
    const Field f(v);
    const double g = gen.gamma();
    for (auto fam : {BasisFamily::cubes(), BasisFamily::axis_rects(2)}) {
      Basis b(s, fam);
      const Window w{0.0, 0.8};
      auto got = median_maximal(b, f, Gamma(g), exhaustive(Engine::sweep, w.hi)).values;
      auto want = brute_median_maximal(b, f, g, w);
      for (Index x = 0; x < s.size(); ++x) EXPECT_EQ(got[x], want[x]);
    }
  }
}

TEST(Maximal, AverageIntervalsClosedForm) {
  // chi of [0, 1] on a line, evaluated at distance t to the left of 0.
  const double h = 1.0 / 32;
  auto s = Space::grid({320}, h, MetricKind::euclidean, {-5.0 + h / 2});
  std::vector<double> v(320, 0.0);
  for (Index i = 0; i < 320; ++i) {
    const double x = s.coords(i)[0];
    if (x > 0 && x < 1) v[i] = 1.0;
  }
  Basis b(s, BasisFamily::cubes());
  auto out = avg_maximal(b, Field(v), exhaustive(Engine::automatic, 20.0)).values;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const Index i = static_cast<Index>(std::lround((-t - s.coords(0)[0]) / h));
    EXPECT_NEAR(out[i], 1.0 / (1.0 + t), 2.0 / 32) << t;
  }
}

TEST(Maximal, LevelSetIdentityOnSharedBases) {
  auto o = props::levelset_identity(40, 51);
  EXPECT_TRUE(o.ok()) << o.first_failure;
}

TEST(Maximal, EnginesAgree) {
  auto o = props::engine_agreement(60, 52);
  EXPECT_TRUE(o.ok()) << o.first_failure;
  EXPECT_GT(o.trials, 30u);
}

TEST(Maximal, LevelsetQuantizationReproducesMaximal) {
  oracle::Dyadic gen(53);
  auto s = Space::grid({9, 8}, 0.125);
  std::vector<double> v(s.size());
  for (auto& x : v) x = gen.real(-3, 3);
  const Field f(v);
  for (auto fam : {BasisFamily::cubes(), BasisFamily::rotated_rects(6, 3)}) {
    Basis b(s, fam);
    for (Engine e : {Engine::per_point, Engine::sweep}) {
      auto opt = exhaustive(e, 0.7);
      auto direct = median_maximal(b, f, Gamma(0.35), opt).values;
      auto quant = median_maximal_levelset(b, f, Gamma(0.35), {}, opt).values;
      for (Index x = 0; x < s.size(); ++x) EXPECT_EQ(direct[x], quant[x]);
    }
  }
}

TEST(Maximal, LevelsetAboveMaximumIsEmpty) {
  auto s = Space::grid({10, 10}, 0.1);
  std::vector<double> v(100);
  for (Index i = 0; i < 100; ++i) v[i] = std::sin(i * 0.3);
  Basis b(s, BasisFamily::cubes());
  EXPECT_TRUE(median_superlevel(b, Field(v), Gamma(0.4), 1.5, exhaustive(Engine::automatic, 0.5)).empty());
}

TEST(Maximal, IndicatorLevelHalf) {
  auto s = Space::grid({20, 20}, 0.05);
  std::vector<Index> m;
  for (Index i = 0; i < 400; ++i)
    if ((i % 20) > 6 && (i % 20) < 12 && (i / 20) > 4 && (i / 20) < 9) m.push_back(i);
  const MSet a(400, m);
  Basis b(s, BasisFamily::axis_rects(3));
  auto opt = exhaustive(Engine::automatic, 0.6);
  auto lhs = median_superlevel(b, Field::indicator(a), Gamma(0.3), 0.5, opt);
  auto avg = avg_maximal(b, Field::indicator(a), opt).values;
  std::vector<Index> rhs;
  for (Index i = 0; i < 400; ++i)
    if (avg[i] >= 0.3) rhs.push_back(i);
  EXPECT_EQ(lhs, MSet(400, rhs));
}

TEST(Maximal, RestrictedIsMonotoneAndCapped) {
  oracle::Dyadic gen(54);
  auto s = Space::grid({14, 14}, 0.125);
  std::vector<double> v(s.size());
  for (auto& x : v) x = gen.value();
  const Field f(v);
  Basis b(s, BasisFamily::axis_rects(2));
  EXPECT_THROW(restricted_maximal(b, f, Gamma(0.5), 0.1, {}), ResolutionExhausted);
  auto full = median_maximal(b, f, Gamma(0.5), exhaustive(Engine::automatic, 1.0)).values;
  auto capped = restricted_maximal(b, f, Gamma(0.5), 1.0, {}).values;
  for (Index x = 0; x < s.size(); ++x) EXPECT_EQ(full[x], capped[x]);
  Field prev = restricted_maximal(b, f, Gamma(0.5), 0.2, {}).values;
  for (double r : {0.3, 0.45, 0.7, 1.2, 3.0}) {
    Field cur = restricted_maximal(b, f, Gamma(0.5), r, {}).values;
    Field avg_prev = restricted_maximal(b, f, std::nullopt, r / 1.5, {}).values;
    Field avg_cur = restricted_maximal(b, f, std::nullopt, r, {}).values;
    for (Index x = 0; x < s.size(); ++x) {
      EXPECT_LE(prev[x], cur[x]);
      EXPECT_LE(avg_prev[x], avg_cur[x]);
    }
    prev = cur;
  }
}

TEST(Maximal, MonotoneInGammaAndHomogeneous) {
  oracle::Dyadic gen(55);
  auto s = Space::grid({12, 12}, 0.125);
  std::vector<double> v(s.size());
  for (auto& x : v) x = gen.value();
  const Field f(v);
  Basis b(s, BasisFamily::cubes());
  auto opt = exhaustive(Engine::automatic, 0.8);
  auto m1 = median_maximal(b, f, Gamma(0.25), opt).values;
  auto m2 = median_maximal(b, f, Gamma(0.5), opt).values;
  auto m3 = median_maximal(b, f.scaled(2.5), Gamma(0.25), opt).values;
  for (Index x = 0; x < s.size(); ++x) {
    EXPECT_GE(m1[x], m2[x]);
    EXPECT_EQ(m3[x], 2.5 * m1[x]);
  }
}

TEST(Maximal, DominatedByAveragesOfPowers) {
  oracle::Dyadic gen(56);
  auto s = Space::grid({10, 10}, 0.125);
  std::vector<double> v(s.size());
  for (auto& x : v) x = gen.value();
  const Field f(v);
  Basis b(s, BasisFamily::axis_rects(2));
  const auto sets = enumerate_collection(b, Window{0, 0.7}, 1u << 30);
  const double g = 0.3;
  const Field med = median_maximal(s, sets, f, Gamma(g));
  for (double p : {1.0, 2.0}) {
    std::vector<double> pw(v.size());
    for (Index i = 0; i < v.size(); ++i) pw[i] = std::pow(std::abs(v[i]), p);
    const Field avg = avg_maximal(s, sets, Field(pw));
    for (Index x = 0; x < s.size(); ++x)
      EXPECT_LE(med[x], std::pow(avg[x] / g, 1.0 / p) * (1 + 1e-12));
  }
}

TEST(Maximal, SelfLowerBound) {
  oracle::Dyadic gen(57);
  auto s = Space::grid({8, 8}, 0.125);
  std::vector<double> v(s.size());
  for (auto& x : v) x = gen.value();
  Basis b(s, BasisFamily::cubes());
  auto m = median_maximal(b, Field(v), Gamma(0.6), exhaustive(Engine::automatic, 0.5)).values;
  for (Index x = 0; x < s.size(); ++x) EXPECT_GE(m[x], std::abs(v[x]));
}

TEST(Maximal, LimsupLiminfBehaviour) {
  const int n = 64;
  const double h = 1.0 / n;
  auto s = Space::grid({n, n}, h);
  std::vector<double> lip(s.size()), jump(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    const double x = s.coords(i)[0], y = s.coords(i)[1];
    lip[i] = std::sin(3 * x) + y;  // Lipschitz constant below 3.2
    jump[i] = x < 0.5 ? 0.0 : 2.0;
  }
  Basis b(s, BasisFamily::cubes());
  const std::vector<double> scales{0.5, 0.25, 0.125, 4.5 * h};
  auto r = limsup_liminf_median(b, Field(lip), Gamma(0.5), scales);
  EXPECT_EQ(r.scale, 4.5 * h);
  for (Index i = 0; i < s.size(); ++i) {
    EXPECT_LE(std::abs(r.limsup[i] - lip[i]), 3.2 * r.scale);
    EXPECT_LE(std::abs(r.liminf[i] - lip[i]), 3.2 * r.scale);
  }
  auto j = limsup_liminf_median(b, Field(jump), Gamma(0.5), scales);
  for (Index i = 0; i < s.size(); ++i) {
    EXPECT_LE(j.limsup[i] - j.liminf[i], 2.0);
    EXPECT_GE(j.liminf[i], 0.0);
  }
  auto c = limsup_liminf_median(b, Field::constant(s.size(), 0.75), Gamma(0.5), scales);
  for (Index i = 0; i < s.size(); ++i) {
    EXPECT_EQ(c.limsup[i], 0.75);
    EXPECT_EQ(c.liminf[i], 0.75);
  }
}

TEST(Maximal, CsvHasProvenance) {
  auto s = Space::grid({3}, 0.5);
  Basis b(s, BasisFamily::cubes());
  auto m = median_maximal(b, Field::constant(3, 1.0), Gamma(0.5), exhaustive(Engine::automatic, 2.0));
  std::ostringstream os;
  write_maximal_csv(os, s, m);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("# {", 0), 0u);
  EXPECT_NE(text.find("\"op\":\"median\""), std::string::npos);
  EXPECT_NE(text.find("index,x0,value"), std::string::npos);
}
