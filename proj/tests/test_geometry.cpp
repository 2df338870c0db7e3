#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ahlab/expr.hpp"
#include "ahlab/geometry.hpp"
#include "ahlab/zoo.hpp"
#include "oracle.hpp"

using ahlab::Chart;
using ahlab::CurvatureBundle;
using ahlab::Tensor;

namespace {

std::vector<double> random_point(const Chart& c, std::mt19937_64& rng) {
  std::vector<double> p(static_cast<std::size_t>(c.dim));
  for (int i = 0; i < c.dim; ++i) {
    std::uniform_real_distribution<double> u(c.domain.lo[static_cast<std::size_t>(i)], c.domain.hi[static_cast<std::size_t>(i)]);
    p[static_cast<std::size_t>(i)] = u(rng);
  }
  return p;
}

std::vector<Chart> direct_zoo() {
  return {ahlab::zoo::flat_kahler(2), ahlab::zoo::sphere2(1.0), ahlab::zoo::sphere2(2.5), ahlab::zoo::hyperbolic(4, 1.0),
          ahlab::zoo::fubini_study_cp2(), ahlab::zoo::kodaira_thurston(), ahlab::zoo::product_s2_h2(1.0)};
}

std::vector<Chart> all_zoo() {
  auto v = direct_zoo();
  v.push_back(ahlab::zoo::s6_nearly_kahler());
  return v;
}

// Largest violation of the algebraic curvature symmetries, normalized.
double symmetry_defect(const Tensor<double>& R) {
  const int n = R.dim();
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double r = R({a, b, c, d});
          worst = std::max(worst, std::abs(r + R({b, a, c, d})));
          worst = std::max(worst, std::abs(r + R({a, b, d, c})));
          worst = std::max(worst, std::abs(r - R({c, d, a, b})));
          worst = std::max(worst, std::abs(r + R({b, c, a, d}) + R({c, a, b, d})));
        }
  return worst / (1.0 + ahlab::max_abs(R));
}

}  // namespace

TEST(Geometry, FlatChartHasNoCurvature) {
  const auto c = ahlab::zoo::flat_kahler(3);
  const std::vector<double> p{0.1, 0.2, 0.3, -0.1, -0.2, -0.3};
  const auto b = ahlab::curvature_bundle(c, p);
  EXPECT_EQ(ahlab::max_abs(ahlab::christoffel(c, p)), 0.0);
  EXPECT_EQ(ahlab::max_abs(b.riemann), 0.0);
  EXPECT_EQ(ahlab::max_abs(b.ricci), 0.0);
  EXPECT_EQ(b.scalar, 0.0);
  EXPECT_EQ(ahlab::max_abs(b.weyl), 0.0);
  EXPECT_EQ(ahlab::max_abs(b.ricci_prime), 0.0);
  EXPECT_EQ(ahlab::max_abs(b.nabla_j), 0.0);
}

TEST(Geometry, ConformalChristoffelMatchesClosedForm) {
  std::mt19937_64 rng(31);
  for (int n : {2, 4, 6}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = oracle::random_polynomial(n, 3, 0.4, rng);
      const auto chart = oracle::conformal_chart(f, n);
      const auto p = random_point(chart, rng);
      const auto gamma = ahlab::christoffel(chart, p);
      oracle::FiniteDifference fd(oracle::as_function(f), p);
      std::vector<double> df(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        std::vector<int> a(static_cast<std::size_t>(n), 0);
        a[static_cast<std::size_t>(k)] = 1;
        df[static_cast<std::size_t>(k)] = fd(a);
      }
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double want = (k == i ? df[static_cast<std::size_t>(j)] : 0.0) +
                                (k == j ? df[static_cast<std::size_t>(i)] : 0.0) -
                                (i == j ? df[static_cast<std::size_t>(k)] : 0.0);
            EXPECT_NEAR(gamma({k, i, j}), want, 1e-8);
          }
    }
  }
}

TEST(Geometry, PoincareBallChristoffelMatchesFiniteDifferences) {
  std::mt19937_64 rng(32);
  const auto chart = ahlab::zoo::hyperbolic(4, 1.0);
  const auto metric = oracle::metric_functions(chart);
  for (int trial = 0; trial < 3; ++trial) {
    const auto p = random_point(chart, rng);
    const auto gamma = ahlab::christoffel(chart, p);
    const auto ref = oracle::christoffel_fd(metric, 4, p);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_TRUE(oracle::close(gamma[k], ref[k], 1e-6, 1e-9)) << k;
  }
}

TEST(Geometry, ChristoffelSymmetricInLowerIndices) {
  std::mt19937_64 rng(33);
  for (const auto& chart : all_zoo()) {
    const auto g = ahlab::christoffel(chart, random_point(chart, rng));
    const int n = chart.dim;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_NEAR(g({k, i, j}), g({k, j, i}), 1e-12) << chart.name;
  }
}

TEST(Geometry, RoundSphereHasCurvatureC) {
  std::mt19937_64 rng(34);
  for (double c : {1.0, 0.5, 3.0}) {
    const auto chart = ahlab::zoo::sphere2(c);
    for (int trial = 0; trial < 5; ++trial) {
      const auto b = ahlab::curvature_bundle(chart, random_point(chart, rng));
      const std::vector<double> x{1.0, 0.0};
      const std::vector<double> y{0.3, 1.0};
      EXPECT_NEAR(ahlab::sectional_curvature(b, x, y), c, 1e-8);
      EXPECT_NEAR(b.in_frame.R({0, 1, 1, 0}), c, 1e-8);
      EXPECT_GT(b.scalar, 0.0);
      EXPECT_NEAR(b.scalar, 2 * c, 1e-8);
    }
  }
}

TEST(Geometry, HyperbolicBallHasCurvatureMinusC) {
  std::mt19937_64 rng(35);
  for (int n : {2, 4, 6}) {
    const auto chart = ahlab::zoo::hyperbolic(n, 2.0);
    const auto b = ahlab::curvature_bundle(chart, random_point(chart, rng));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) EXPECT_NEAR(b.in_frame.R({i, j, j, i}), -2.0, 1e-8);
    EXPECT_NEAR(b.scalar, -2.0 * n * (n - 1), 1e-7);
  }
}

TEST(Geometry, RicciMatchesFiniteDifferenceOracle) {
  std::mt19937_64 rng(36);
  std::vector<Chart> charts = {ahlab::zoo::sphere2(1.0), ahlab::zoo::hyperbolic(4, 1.0), ahlab::zoo::fubini_study_cp2(),
                               ahlab::zoo::kodaira_thurston()};
  charts.push_back(oracle::conformal_chart(oracle::random_polynomial(4, 3, 0.3, rng), 4));
  for (const auto& chart : charts) {
    const auto p = random_point(chart, rng);
    const auto b = ahlab::curvature_bundle(chart, p);
    const auto ref = oracle::ricci_fd(oracle::metric_functions(chart), chart.dim, p);
    for (int i = 0; i < chart.dim; ++i)
      for (int j = 0; j < chart.dim; ++j)
        EXPECT_TRUE(oracle::close(b.ricci({i, j}), ref(i, j), 1e-6, 1e-8)) << chart.name << " " << i << j << ": "
                                                                           << b.ricci({i, j}) << " vs " << ref(i, j);
  }
}

TEST(Geometry, CurvatureSymmetriesHoldOnEveryChart) {
  std::mt19937_64 rng(37);
  auto charts = all_zoo();
  for (int n : {4, 6}) charts.push_back(oracle::conformal_chart(oracle::random_polynomial(n, 3, 0.3, rng), n));
  for (const auto& chart : charts) {
    for (int trial = 0; trial < 2; ++trial) {
      const auto b = ahlab::curvature_bundle(chart, random_point(chart, rng));
      EXPECT_LE(symmetry_defect(b.riemann), 1e-8) << chart.name;
      EXPECT_LE(symmetry_defect(b.in_frame.R), 1e-8) << chart.name;
      double trace = 0.0;
      for (int i = 0; i < chart.dim; ++i) {
        trace += b.in_frame.S({i, i});
        for (int j = 0; j < chart.dim; ++j) EXPECT_NEAR(b.ricci({i, j}), b.ricci({j, i}), 1e-10);
      }
      EXPECT_NEAR(trace, b.scalar, 1e-9 * (1 + std::abs(b.scalar))) << chart.name;
    }
  }
}

TEST(Geometry, ConformallyFlatMetricsHaveVanishingWeyl) {
  std::mt19937_64 rng(38);
  for (int n : {4, 6, 8}) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto chart = oracle::conformal_chart(oracle::random_polynomial(n, 3, 0.3, rng), n, 0.4);
      const auto b = ahlab::curvature_bundle(chart, random_point(chart, rng));
      EXPECT_LE(ahlab::max_abs(b.weyl) / (1 + ahlab::max_abs(b.riemann)), 1e-7) << n;
    }
  }
}

TEST(Geometry, FubiniStudyIsKahlerEinsteinButNotConformallyFlat) {
  const auto chart = ahlab::zoo::fubini_study_cp2();
  const std::vector<double> p{0.2, -0.1, 0.3, 0.05};
  const auto b = ahlab::curvature_bundle(chart, p);
  EXPECT_LE(ahlab::max_abs(b.nabla_j), 1e-8);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(b.in_frame.S({i, j}), i == j ? 6.0 : 0.0, 1e-8);
  EXPECT_GT(ahlab::max_abs(b.weyl) / (1 + ahlab::max_abs(b.riemann)), 0.01);
  // holomorphic sectional curvature 4, totally real 1
  EXPECT_NEAR(b.in_frame.R({0, 2, 2, 0}), 4.0, 1e-8);
  EXPECT_NEAR(b.in_frame.R({0, 1, 1, 0}), 1.0, 1e-8);
}

TEST(Geometry, KahlerChartsHaveParallelJ) {
  std::mt19937_64 rng(39);
  for (const auto& chart : {ahlab::zoo::flat_kahler(2), ahlab::zoo::sphere2(1.0), ahlab::zoo::hyperbolic(2, 1.0),
                            ahlab::zoo::fubini_study_cp2(), ahlab::zoo::product_s2_h2(0.7)}) {
    const auto nj = ahlab::nabla_J(chart, random_point(chart, rng));
    EXPECT_LE(ahlab::max_abs(nj.dj), 1e-8) << chart.name;
    EXPECT_LE(ahlab::max_abs(nj.rough_laplacian), 1e-8) << chart.name;
  }
}

TEST(Geometry, KTensorIsAntisymmetric) {
  std::mt19937_64 rng(40);
  for (const auto& chart : all_zoo()) {
    const auto nj = ahlab::nabla_J(chart, random_point(chart, rng));
    const int n = chart.dim;
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        EXPECT_EQ(nj.k({a, a, c}), 0.0);
        for (int b = 0; b < n; ++b) EXPECT_EQ(nj.k({a, b, c}), -nj.k({b, a, c}));
      }
  }
}

TEST(Geometry, KodairaThurstonIsStrictlyAlmostKahler) {
  std::mt19937_64 rng(41);
  const auto chart = ahlab::zoo::kodaira_thurston();
  for (int trial = 0; trial < 3; ++trial) {
    const auto p = random_point(chart, rng);
    const auto nj = ahlab::nabla_J(chart, p);
    EXPECT_GT(ahlab::max_abs(nj.dj), 0.1);
    EXPECT_LE(ahlab::max_abs(ahlab::kahler_form_differential(chart, p)), 1e-9);
  }
}

TEST(Geometry, HomogeneousExamplesHaveParallelRicci) {
  std::mt19937_64 rng(42);
  for (const auto& chart : {ahlab::zoo::sphere2(1.0), ahlab::zoo::hyperbolic(4, 1.0), ahlab::zoo::product_s2_h2(1.0),
                            ahlab::zoo::fubini_study_cp2(), ahlab::zoo::s6_nearly_kahler()}) {
    const auto d = ahlab::covariant_derivatives_S(chart, random_point(chart, rng));
    EXPECT_LE(ahlab::max_abs(d.first), 1e-7) << chart.name;
    EXPECT_LE(ahlab::max_abs(d.second), 1e-7) << chart.name;
  }
}

TEST(Geometry, EmbeddedAndStereographicSpheresAgree) {
  ahlab::EmbeddedPresentation e;
  e.ambient_dim = 3;
  e.map = {ahlab::parse("x1", 2), ahlab::parse("x2", 2), ahlab::parse("sqrt(1 - x1^2 - x2^2)", 2)};
  e.product = ahlab::AmbientProduct::from_triples(3, {{0, 1, 2, 1}});
  const Chart embedded{"s2_embedded", 2, e, {}, {{-0.5, -0.5}, {0.5, 0.5}}};
  const auto stereo = ahlab::zoo::sphere2(1.0);
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_point(embedded, rng);
    const double z = std::sqrt(1 - p[0] * p[0] - p[1] * p[1]);
    const std::vector<double> q{p[0] / (1 + z), p[1] / (1 + z)};
    const auto be = ahlab::curvature_bundle(embedded, p);
    const auto bs = ahlab::curvature_bundle(stereo, q);
    EXPECT_NEAR(be.in_frame.R({0, 1, 1, 0}), bs.in_frame.R({0, 1, 1, 0}), 1e-6);
    EXPECT_NEAR(be.scalar, bs.scalar, 1e-6);
    EXPECT_LE(ahlab::max_abs(be.nabla_j), 1e-8);
  }
}

TEST(Geometry, NearlyKahlerSixSphere) {
  const auto chart = ahlab::zoo::s6_nearly_kahler();
  const std::vector<double> p{0.1, -0.2, 0.05, 0.15, -0.1, 0.2};
  const auto b = ahlab::curvature_bundle(chart, p);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) EXPECT_NEAR(b.in_frame.R({i, j, j, i}), 1.0, 1e-8);
  EXPECT_NEAR(b.scalar, 30.0, 1e-7);
  EXPECT_GT(ahlab::max_abs(b.in_frame.DJ), 0.1);
  const int n = 6;
  double nk = 0.0;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) nk = std::max(nk, std::abs(b.in_frame.DJ({a, a, c})));
  EXPECT_LE(nk, 1e-8);
}

TEST(Geometry, InvalidChartsAreRejected) {
  auto c = ahlab::zoo::flat_kahler(1);
  const std::vector<double> p{0.0, 0.0};
  auto asym = c;
  std::get<ahlab::DirectPresentation>(asym.presentation).metric[1] = ahlab::parse("0.1", 2);
  EXPECT_THROW(ahlab::curvature_bundle(asym, p), ahlab::GeometryError);
  auto badj = c;
  std::get<ahlab::DirectPresentation>(badj.presentation).complex_structure[0] = ahlab::parse("0.5", 2);
  EXPECT_THROW(ahlab::curvature_bundle(badj, p), ahlab::GeometryError);
  auto incompatible = c;
  std::get<ahlab::DirectPresentation>(incompatible.presentation).metric[0] = ahlab::parse("2", 2);
  EXPECT_THROW(ahlab::curvature_bundle(incompatible, p), ahlab::GeometryError);
  EXPECT_THROW(ahlab::curvature_bundle(c, std::vector<double>{0.0}), ahlab::DimensionError);
  auto singular = c;
  std::get<ahlab::DirectPresentation>(singular.presentation).metric[0] = ahlab::parse("x1", 2);
  std::get<ahlab::DirectPresentation>(singular.presentation).metric[3] = ahlab::parse("x1", 2);
  EXPECT_THROW(ahlab::curvature_bundle(singular, p), ahlab::Error);
}

TEST(Geometry, EmbeddedTangencyIsValidated) {
  ahlab::EmbeddedPresentation e;
  e.ambient_dim = 3;
  e.map = {ahlab::parse("x1", 2), ahlab::parse("x2", 2), ahlab::parse("0.5*x1^2 + 0.3*x2", 2)};
  e.product = ahlab::AmbientProduct::from_triples(3, {{0, 1, 2, 1}});
  const Chart c{"paraboloid", 2, e, {}, {{-0.5, -0.5}, {0.5, 0.5}}};
  EXPECT_THROW(ahlab::curvature_bundle(c, std::vector<double>{0.2, 0.1}), ahlab::GeometryError);
}
