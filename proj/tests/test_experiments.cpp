#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "medmax/experiments.hpp"

using namespace medmax;

namespace {

// Line of n cells of width h covering [-half, half).
Space line(int n, double h) {
  return Space::grid({n}, h, MetricKind::euclidean, {-0.5 * n * h + h / 2});
}

NamedField unit_interval(const Space& s) {
  std::vector<double> lo{0.0}, hi{1.0};
  return {"chi01", Field::indicator(box_set(s, lo, hi))};
}

}  // namespace

TEST(Experiments, DensityWholeSpace) {
  auto s = Space::grid({16, 16}, 1.0 / 16, MetricKind::euclidean, {1.0 / 32, 1.0 / 32});
  Basis b(s, BasisFamily::cubes());
  const std::vector<MSet> sets{MSet::all(s.size())};
  const std::vector<double> scales{0.5, 0.25, 0.1};
  auto r = density_test(b, sets, scales);
  for (const auto& row : r.table.rows) EXPECT_EQ(row[4].get<double>(), 0.0);
  EXPECT_TRUE(r.verdicts["nonincreasing"].get<bool>());
}

TEST(Experiments, DensityHalfPlaneFailsNearBoundary) {
  const int n = 32;
  const double h = 1.0 / n;
  auto s = Space::grid({n, n}, h, MetricKind::euclidean, {h / 2, h / 2});
  Basis b(s, BasisFamily::cubes());
  std::vector<double> lo{0.0, 0.0}, hi{0.5, 1.0};
  const std::vector<MSet> sets{box_set(s, lo, hi)};
  const std::vector<double> scales{8 * h, 4 * h, 2 * h};
  auto r = density_test(b, sets, scales);
  ASSERT_EQ(r.table.rows.size(), 3u);
  for (const auto& row : r.table.rows) {
    const double eps = row[1].get<double>();
    // Failing points lie in the band of columns within eps of x = 1/2; a cube
    // of side k cells has diameter (k-1) sqrt(2) h.
    const int side = static_cast<int>(std::ceil(eps / (std::sqrt(2.0) * h)));
    const double band = 2.0 * (side - 1) * n;
    EXPECT_LE(row[2].get<double>(), band);
    EXPECT_GT(row[2].get<double>(), 0.0);
  }
  EXPECT_TRUE(r.verdicts["nonincreasing"].get<bool>());
}

TEST(Experiments, LebesguePointsOfLipschitzField) {
  const int n = 48;
  const double h = 1.0 / n;
  auto s = Space::grid({n, n}, h, MetricKind::euclidean, {h / 2, h / 2});
  std::vector<double> v(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    const auto x = s.coords(i);
    v[i] = std::sin(4 * x[0]) * std::cos(3 * x[1]);
  }
  NamedField f{"trig", Field(v), 5.0};  // |grad| <= sqrt(16 + 9)
  Basis b(s, BasisFamily::cubes());
  const std::vector<double> gammas{0.25, 0.5};
  const std::vector<double> scales{0.25, 0.1, 3 * h};
  auto r = lebesgue_point_test(b, f, gammas, scales);
  for (const auto& row : r.table.rows) EXPECT_EQ(row[3].get<double>(), 0.0);
}

TEST(Experiments, LebesgueOnIndicatorWithinDensityFailures) {
  const int n = 24;
  const double h = 1.0 / n;
  auto s = Space::grid({n, n}, h, MetricKind::euclidean, {h / 2, h / 2});
  std::vector<double> lo{0.2, 0.3}, hi{0.7, 0.6};
  const MSet a = box_set(s, lo, hi);
  Basis b(s, BasisFamily::axis_rects(2));
  const std::vector<double> scales{0.3, 0.15};
  const std::vector<MSet> sets{a};
  auto dens = density_test(b, sets, scales);
  const std::vector<double> gammas{0.3, 0.7};
  auto leb = lebesgue_point_test(b, NamedField{"chi", Field::indicator(a)}, gammas, scales);
  ASSERT_EQ(leb.table.rows.size(), 4u);
  for (std::size_t i = 0; i < leb.table.rows.size(); ++i)
    EXPECT_LE(leb.table.rows[i][5].get<double>(), dens.table.rows[i % 2][4].get<double>());
}

TEST(Experiments, WeakTypeOneDimensionalClosedForm) {
  const double h = 1.0 / 32;
  auto s = line(1024, h);
  Basis b(s, BasisFamily::cubes());
  const std::vector<NamedField> in{unit_interval(s)};
  const std::vector<double> half{0.5};
  for (double g : {0.125, 0.25, 0.5}) {
    auto r = weak_type_constant(b, Gamma(g), in, half);
    EXPECT_DOUBLE_EQ(r.summary["c_est"].get<double>(), 2 / g - 1);
  }
}

TEST(Experiments, WeakTypeConstantInput) {
  auto s = Space::grid({12, 12}, 0.25);
  Basis b(s, BasisFamily::rotated_rects(4, 4));
  const std::vector<NamedField> in{{"one", Field::constant(s.size(), 1.0)}};
  const std::vector<double> lambdas{0.0, 0.25, 0.5, 0.99, 1.0};
  auto r = weak_type_constant(b, Gamma(0.3), in, lambdas);
  EXPECT_EQ(r.summary["c_est"].get<double>(), 1.0);
  EXPECT_EQ(r.table.rows.size(), 4u);  // lambda = 1 has both sets empty
}

TEST(Experiments, WeakTypeIndicatorMatchesAverages) {
  const int n = 20;
  auto s = Space::grid({n, n}, 1.0 / n);
  std::vector<Index> m;
  for (Index i = 0; i < s.size(); ++i)
    if ((i * 7919u) % 13u < 2u) m.push_back(i);
  const MSet a(s.size(), m);
  Basis b(s, BasisFamily::cubes());
  const std::vector<NamedField> in{{"chi", Field::indicator(a)}};
  const std::vector<double> half{0.5};
  for (double g : {0.2, 0.4}) {
    auto r = weak_type_constant(b, Gamma(g), in, half);
    auto avg = avg_maximal(b, Field::indicator(a)).values;
    double num = 0.0;
    for (Index x = 0; x < s.size(); ++x)
      if (avg[x] >= g * (1 - 0x1p-40)) num += s.weight(x);
    EXPECT_DOUBLE_EQ(r.summary["c_est"].get<double>(), num / measure(s, a));
  }
}

TEST(Experiments, WeakTypeExactLevelsAgreeAcrossEngines) {
  auto s = Space::grid({9, 7}, 0.125);
  auto corpus = make_corpus(s, CorpusSpec{});
  Basis b(s, BasisFamily::cubes());
  ExperimentOptions sweep, per_point;
  sweep.maximal.engine = Engine::sweep;
  per_point.maximal.engine = Engine::per_point;
  per_point.maximal.budget = 1u << 30;
  auto a = weak_type_constant(b, Gamma(0.3), corpus, {}, sweep);
  auto c = weak_type_constant(b, Gamma(0.3), corpus, {}, per_point);
  EXPECT_EQ(a.summary["c_est"], c.summary["c_est"]);
  EXPECT_EQ(a.table.rows, c.table.rows);
}

TEST(Experiments, LpBoundConstantAndInterval) {
  const double h = 1.0 / 16;
  auto s = line(256, h);
  Basis b(s, BasisFamily::cubes());
  const std::vector<double> ps{1.0, 2.0};
  const std::vector<NamedField> one{{"one", Field::constant(s.size(), 1.0)}};
  auto r = lp_bound(b, Gamma(0.25), ps, one);
  for (const auto& row : r.table.rows) EXPECT_DOUBLE_EQ(row[4].get<double>(), 1.0);
  const std::vector<NamedField> chi{unit_interval(s)};
  auto q = lp_bound(b, Gamma(0.25), ps, chi);
  EXPECT_LE(q.summary["per_p"][0]["max_ratio"].get<double>(), 7.0 * (1 + 1e-12));
  EXPECT_TRUE(q.verdicts["bound_holds"].get<bool>());
}

TEST(Experiments, LpBoundOnCorpus) {
  auto s = line(200, 1.0 / 32);
  Basis b(s, BasisFamily::cubes());
  auto corpus = make_corpus(s, CorpusSpec{});
  const std::vector<double> ps{1.0, 2.0, 3.0};
  auto r = lp_bound(b, Gamma(0.25), ps, corpus);
  EXPECT_TRUE(r.verdicts["bound_holds"].get<bool>());
  EXPECT_TRUE(r.verdicts["no_zero_norm_anomaly"].get<bool>());
}

TEST(Experiments, ContinuityInMeasure) {
  auto s = Space::grid({16, 16}, 1.0 / 16);
  Basis b(s, BasisFamily::cubes());
  std::vector<double> lo{0.1, 0.1}, hi{0.6, 0.5};
  const MSet a = box_set(s, lo, hi);
  std::vector<NamedField> zeros, scaled, shrinking;
  for (int k = 0; k < 6; ++k) {
    zeros.push_back({"zero", Field::constant(s.size(), 0.0)});
    scaled.push_back({"scaled", Field::indicator(a).scaled(std::ldexp(1.0, -k))});
    std::vector<double> lo_k{0.1, 0.1}, hi_k{0.1 + 0.5 / (k + 1), 0.1 + 0.5 / (k + 1)};
    shrinking.push_back({"box", Field::indicator(box_set(s, lo_k, hi_k))});
  }
  auto z = continuity_in_measure(b, Gamma(0.5), 0.3, 1.0, zeros);
  for (const auto& row : z.table.rows) EXPECT_EQ(row[3].get<double>(), 0.0);
  auto c = continuity_in_measure(b, Gamma(0.5), 0.3, 1.0, scaled);
  for (const auto& row : c.table.rows) {
    const double amp = std::ldexp(1.0, -row[0].get<int>());
    if (amp <= 0.3) EXPECT_EQ(row[3].get<double>(), 0.0);
  }
  EXPECT_TRUE(c.verdicts["final_below_tol"].get<bool>());
  auto d = continuity_in_measure(b, Gamma(0.25), 0.5, 2.0, shrinking);
  EXPECT_TRUE(d.verdicts["measures_nonincreasing"].get<bool>());
  EXPECT_TRUE(d.verdicts["norms_nonincreasing"].get<bool>());
}

TEST(Experiments, FinitenessScan) {
  auto s = Space::grid({12, 12}, 1.0 / 12);
  Basis b(s, BasisFamily::cubes());
  auto corpus = make_corpus(s, CorpusSpec{});
  auto r = finiteness_scan(b, Gamma(0.5), corpus, 1e300);
  EXPECT_EQ(r.summary["max_fraction"].get<double>(), 0.0);
  auto q = finiteness_scan(b, Gamma(0.5), corpus, 0.1);
  EXPECT_GT(q.summary["max_fraction"].get<double>(), 0.0);
}

TEST(Experiments, CorpusIsDeterministicAndScaleFree) {
  auto coarse = Space::grid({32, 32}, 1.0 / 32, MetricKind::euclidean, {1.0 / 64, 1.0 / 64});
  auto fine = Space::grid({128, 128}, 1.0 / 128, MetricKind::euclidean, {1.0 / 256, 1.0 / 256});
  CorpusSpec spec;
  spec.seed = 5;
  auto a = make_corpus(coarse, spec), a2 = make_corpus(coarse, spec);
  auto c = make_corpus(fine, spec);
  ASSERT_EQ(a.size(), 11u);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, c[i].name);
    EXPECT_EQ(std::vector<double>(a[i].field.values().begin(), a[i].field.values().end()),
              std::vector<double>(a2[i].field.values().begin(), a2[i].field.values().end()));
  }
  // Box indicators carry nearly the same area at both resolutions.
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_NEAR(lp_norm(coarse, a[i].field, 1.0), lp_norm(fine, c[i].field, 1.0), 0.05);
  // Stated Lipschitz constants hold on neighboring points.
  for (const auto& f : c) {
    if (!std::isfinite(f.lipschitz)) continue;
    for (Index i = 0; i + 1 < fine.size(); ++i)
      EXPECT_LE(std::abs(f.field[i + 1] - f.field[i]), f.lipschitz * fine.distance(i, i + 1) + 1e-12);
  }
  EXPECT_THROW(corpus_from_json(nlohmann::json{{"bogus", 1}}), DomainError);
  EXPECT_EQ(corpus_to_json(corpus_from_json(corpus_to_json(spec))), corpus_to_json(spec));
}

TEST(Experiments, CsvFormatting) {
  Table t;
  t.columns = {"name", "x", "n"};
  t.rows.push_back(nlohmann::json::array({"a", 0.1, 3}));
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str(), "name,x,n\na,0.10000000000000001,3\n");
}
