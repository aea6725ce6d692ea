#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "medmax/space.hpp"
#include "support/oracles.hpp"

using namespace medmax;

namespace {

Space random_cloud(oracle::Dyadic& gen, int n) {
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    pts.push_back({static_cast<double>(i), gen.real(0.0, 1.0)});
    w.push_back(gen.weight());
  }
  return Space::cloud(pts, w);
}

}  // namespace

TEST(Space, EmptySetHasZeroMeasure) {
  auto s = Space::grid({4}, 1.0);
  EXPECT_EQ(measure(s, MSet::none(4)), 0.0);
}

TEST(Space, FullFourPointSpace) {
  auto s = Space::cloud({{0}, {1}, {2}, {3}}, {1, 1, 1, 1});
  EXPECT_EQ(measure(s, MSet::all(4)), 4.0);
}

TEST(Space, MeasureMatchesResummation) {
  oracle::Dyadic gen(11);
  for (int t = 0; t < 50; ++t) {
    auto s = random_cloud(gen, gen.uniform(1, 30));
    std::vector<char> mask(s.size());
    for (auto& c : mask) c = static_cast<char>(gen.uniform(0, 1));
    auto a = MSet::from_mask(mask);
    EXPECT_EQ(measure(s, a), oracle::measure(s, a));
  }
}

TEST(Space, MeasureAdditiveAndMonotone) {
  oracle::Dyadic gen(12);
  for (int t = 0; t < 50; ++t) {
    auto s = random_cloud(gen, 20);
    std::vector<char> ma(20), mb(20);
    for (int i = 0; i < 20; ++i) {
      ma[i] = static_cast<char>(gen.uniform(0, 1));
      mb[i] = static_cast<char>(gen.uniform(0, 1));
    }
    auto a = MSet::from_mask(ma), b = MSet::from_mask(mb);
    auto only_b = set_difference(b, a);
    EXPECT_EQ(measure(s, set_union(a, only_b)), measure(s, a) + measure(s, only_b));
    EXPECT_LE(measure(s, set_intersection(a, b)), measure(s, a));
  }
}

TEST(Space, BallIsolationAndSaturation) {
  auto s = Space::grid({5, 5}, 0.5);
  EXPECT_EQ(ball(s, 12, 0.4).size(), 1u);
  EXPECT_TRUE(ball(s, 12, 0.4).contains(12));
  EXPECT_EQ(ball(s, 0, s.diameter() + 0.1).size(), 25u);
}

TEST(Space, BallStrictInequality) {
  auto s = Space::grid({11}, 0.25);
  EXPECT_EQ(ball(s, 5, 2.5 * 0.25).size(), 5u);
  EXPECT_EQ(ball(s, 5, 2.0 * 0.25).size(), 3u);  // distance exactly r excluded
}

TEST(Space, BallsNested) {
  auto s = Space::grid({9, 9}, 1.0);
  for (double r1 = 0.5; r1 < 8; r1 += 0.7)
    for (double r2 = r1; r2 < 9; r2 += 1.1) EXPECT_TRUE(ball(s, 40, r1).subset_of(ball(s, 40, r2)));
}

TEST(Space, LpNormBasics) {
  auto s = Space::grid({8}, 1.0 / 8);
  EXPECT_EQ(lp_norm(s, Field::constant(8, 0.0), 2.0), 0.0);
  for (double p : {0.5, 1.0, 2.0, 3.0, double(INFINITY)})
    EXPECT_NEAR(lp_norm(s, Field::constant(8, 1.0), p), 1.0, 1e-15);
}

TEST(Space, LpNormMatchesQuadrature) {
  oracle::Dyadic gen(13);
  auto s = random_cloud(gen, 25);
  std::vector<double> v(25);
  for (auto& x : v) x = gen.value();
  double sum = 0.0;
  for (Index i = 0; i < 25; ++i) sum += v[i] * v[i] * s.weight(i);
  EXPECT_NEAR(lp_norm(s, Field(v), 2.0), std::sqrt(sum), 1e-12);
}

TEST(Space, QuasiTriangleBelowOne) {
  oracle::Dyadic gen(14);
  for (int t = 0; t < 100; ++t) {
    auto s = random_cloud(gen, 12);
    std::vector<double> a(12), b(12), c(12);
    for (int i = 0; i < 12; ++i) {
      a[i] = gen.value();
      b[i] = gen.value();
      c[i] = a[i] + b[i];
    }
    for (double p : {0.25, 0.5, 1.0}) {
      const double lhs = std::pow(lp_norm(s, Field(c), p), p);
      const double rhs = std::pow(lp_norm(s, Field(a), p), p) + std::pow(lp_norm(s, Field(b), p), p);
      EXPECT_LE(lhs, rhs * (1 + 1e-12));
    }
  }
}

TEST(Space, L0GaugeClosedForms) {
  auto s = Space::grid({8}, 0.5);  // total mass 4
  EXPECT_EQ(l0_gauge(s, Field::constant(8, 0.0)), 0.0);
  EXPECT_EQ(l0_gauge(s, Field::constant(8, 1.5)), 1.5);
  EXPECT_EQ(l0_gauge(s, Field::constant(8, 7.0)), 4.0);
}

TEST(Space, L0GaugeMatchesScan) {
  oracle::Dyadic gen(15);
  for (int t = 0; t < 30; ++t) {
    auto s = random_cloud(gen, 15);
    std::vector<double> v(15);
    for (auto& x : v) x = gen.value(2);
    const Field f(v);
    const double exact = l0_gauge(s, f);
    const int steps = 20000;
    double top = 0.0;
    for (double x : v) top = std::max(top, std::abs(x));
    const double scanned = oracle::l0_scan(s, f, steps);
    EXPECT_LE(exact, scanned + 1e-12);
    EXPECT_GE(exact, scanned - top / steps - 1e-12);
  }
}

TEST(Space, L0GaugeDetectsConvergenceInMeasure) {
  auto s = Space::grid({64}, 1.0 / 64);
  // spikes of fixed height on shrinking supports converge in measure
  double prev = 1e9;
  for (int k = 1; k <= 32; k *= 2) {
    std::vector<double> v(64, 0.0);
    for (int i = 0; i < 64 / k; ++i) v[i] = 5.0;
    const double g = l0_gauge(s, Field(v));
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LE(prev, 1.0 / 32 + 1e-15);
  std::vector<double> half(64, 0.0);
  for (int i = 0; i < 32; ++i) half[i] = 1.0;
  EXPECT_EQ(l0_gauge(s, Field(half)), 0.5);
}

TEST(Space, DoublingEstimates) {
  auto one = Space::cloud({{0.0}}, {1.0});
  std::vector<BallSample> single{{0, 1.0}};
  auto e1 = estimate_doubling(one, single);
  EXPECT_EQ(e1.constant, 1.0);
  EXPECT_EQ(e1.exponent, 0.0);

  auto line = Space::grid({201}, 1.0);
  std::vector<BallSample> ls;
  for (double r = 3.5; r < 40; r += 4) ls.push_back({100, r});
  EXPECT_NEAR(estimate_doubling(line, ls).constant, 2.0, 0.3);

  auto plane = Space::grid({101, 101}, 1.0);
  std::vector<BallSample> ps;
  for (double r = 6.5; r < 24; r += 3) ps.push_back({50 + 101 * 50, r});
  EXPECT_NEAR(estimate_doubling(plane, ps).constant, 4.0, 0.5);
}

TEST(Space, DistanceMatrixValidation) {
  EXPECT_NO_THROW(Space::from_distances({{0, 1}, {1, 0}}, {1, 1}));
  EXPECT_THROW(Space::from_distances({{0, 1}, {2, 0}}, {1, 1}), DomainError);
  EXPECT_THROW(Space::from_distances({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}, {1, 1, 1}), DomainError);
  EXPECT_THROW(Space::cloud({{0}}, {0.0}), DomainError);
}

TEST(Space, FieldRejectsNonFinite) {
  EXPECT_THROW(Field(std::vector<double>{1.0, NAN}), DomainError);
  EXPECT_THROW(Field(std::vector<double>{INFINITY}), DomainError);
}
