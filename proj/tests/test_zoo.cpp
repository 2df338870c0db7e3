#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ahlab/analysis.hpp"
#include "ahlab/sampling.hpp"
#include "ahlab/zoo.hpp"

namespace zoo = ahlab::zoo;

namespace {

std::vector<std::vector<double>> points(const ahlab::Chart& c, int count) {
  return ahlab::halton_points(c.domain, count, 0xC0FFEEULL);
}

// max |R - kappa (g g - g g)| over frame components
double space_form_deviation(const ahlab::Tensor<double>& R, double kappa) {
  const int n = R.dim();
  double dev = 0.0;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int u = 0; u < n; ++u) {
          const double model = kappa * ((x == u && y == z ? 1.0 : 0.0) - (x == z && y == u ? 1.0 : 0.0));
          dev = std::max(dev, std::abs(R({x, y, z, u}) - model));
        }
  return dev;
}

}  // namespace

// Every chart entry reproduces its expected row.
TEST(Zoo, ExpectedTableIsReproduced) {
  for (const auto& entry : zoo::entries()) {
    if (entry.synthetic) continue;
    const auto chart = zoo::build(entry.name, entry.defaults);
    const auto& ex = entry.expected;
    for (const auto& p : points(chart, 3)) {
      const auto b = ahlab::curvature_bundle(chart, p);
      const auto c = ahlab::classify(b, 1e-6);
      if (ex.verdict) EXPECT_EQ(c.verdict(), *ex.verdict) << entry.name;
      if (ex.conformally_flat) EXPECT_EQ(c.is_conformally_flat(), *ex.conformally_flat) << entry.name;
      if (ex.ricci_clusters) {
        const auto s = ahlab::ricci_spectrum(b, 1e-6);
        ASSERT_EQ(s.clusters.size(), ex.ricci_clusters->size()) << entry.name;
        for (std::size_t k = 0; k < s.clusters.size(); ++k)
          EXPECT_NEAR(s.clusters[k].value, (*ex.ricci_clusters)[k], 1e-7) << entry.name;
      }
      if (ex.sectional_curvature) {
        EXPECT_LE(space_form_deviation(b.in_frame.R, *ex.sectional_curvature), 1e-7) << entry.name;
      }
      if (ex.universal_identities) EXPECT_FALSE(ahlab::check_universal(b, 1e-6).failed()) << entry.name;
      EXPECT_FALSE(ex.provenance.empty());
    }
  }
}

TEST(Zoo, ProductOfFlatChartsIsFlat) {
  const auto chart = zoo::product(zoo::flat_kahler(1), zoo::flat_kahler(2));
  EXPECT_EQ(chart.dim, 6);
  const auto b = ahlab::curvature_bundle(chart, points(chart, 1)[0]);
  EXPECT_EQ(ahlab::max_abs(b.riemann), 0.0);
  EXPECT_EQ(ahlab::max_abs(b.nabla_j), 0.0);
}

TEST(Zoo, ProductRejectsEmbeddedCharts) {
  EXPECT_THROW(zoo::product(zoo::s6_nearly_kahler(), zoo::flat_kahler(1)), ahlab::DomainError);
  EXPECT_THROW(zoo::product(zoo::flat_kahler(4), zoo::flat_kahler(1)), ahlab::DimensionError);
}

TEST(Zoo, ProductRenamesClashingParameters) {
  const auto chart = zoo::product(zoo::sphere2(1.0), zoo::sphere2(2.0));
  EXPECT_EQ(chart.params.at("c"), 1.0);
  EXPECT_EQ(chart.params.at("c_2"), 2.0);
  const auto b = ahlab::curvature_bundle(chart, std::vector<double>{0.1, 0.2, -0.1, 0.05});
  // sectional curvatures of the two coordinate planes are c and c_2
  EXPECT_NEAR(b.in_frame.R({0, 2, 2, 0}) + b.in_frame.R({1, 3, 3, 1}), 3.0, 1e-8);
}

TEST(Zoo, InvalidParametersThrow) {
  EXPECT_THROW(zoo::sphere2(-1.0), ahlab::DomainError);
  EXPECT_THROW(zoo::sphere2(0.0), ahlab::DomainError);
  EXPECT_THROW(zoo::hyperbolic(3, 1.0), ahlab::DomainError);
  EXPECT_THROW(zoo::hyperbolic(10, 1.0), ahlab::DomainError);
  EXPECT_THROW(zoo::flat_kahler(5), ahlab::DomainError);
  EXPECT_THROW(zoo::flat_kahler(0), ahlab::DomainError);
  EXPECT_THROW(zoo::build("sphere2", {{"m", {1}}}), ahlab::DomainError);
  EXPECT_THROW(zoo::build("flat_kahler", {{"m", {1.5}}}), ahlab::DomainError);
  EXPECT_THROW(zoo::build("no_such_entry"), ahlab::DomainError);
  EXPECT_THROW(zoo::build("synthetic_product"), ahlab::DomainError);
  EXPECT_THROW(zoo::synthetic_curvature("sphere2"), ahlab::DomainError);
  EXPECT_THROW(zoo::synthetic_product({4, 2}, {-1.0}), ahlab::DomainError);
  EXPECT_THROW(zoo::synthetic_product({3, 2}, {-1.0, 1.0}), ahlab::DomainError);
  EXPECT_THROW(zoo::synthetic_product({6, 4}, {-1.0, 1.0}), ahlab::DimensionError);
}

TEST(Zoo, SyntheticSpaceFormIsConformallyFlat) {
  for (int n : {2, 4, 6, 8})
    for (double k : {-1.0, 0.0, 0.5}) {
      const auto s = zoo::synthetic_space_form(n, k);
      EXPECT_LE(ahlab::max_abs(zoo::weyl(s)), 1e-12) << n << " " << k;
    }
}

TEST(Zoo, OppositeCurvatureProductsAreConformallyFlat) {
  for (const auto& dims : std::vector<std::vector<int>>{{2, 2}, {4, 2}, {6, 2}, {2, 4}}) {
    for (double k : {1.0, 0.3}) {
      const auto s = zoo::synthetic_product(dims, {-k, k});
      EXPECT_LE(ahlab::max_abs(zoo::weyl(s)), 1e-10) << dims[0] << "," << dims[1];
    }
  }
  // equal signs are not conformally flat once both factors have dim >= 2
  EXPECT_GT(ahlab::max_abs(zoo::weyl(zoo::synthetic_product({2, 2}, {1.0, 1.0}))), 0.1);
}

TEST(Zoo, SyntheticHyperbolicSixSpace) {
  const auto s = zoo::synthetic_space_form(6, -1.0);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) EXPECT_EQ(s.S({a, b}), a == b ? -5.0 : 0.0);
  EXPECT_EQ(zoo::scalar_curvature(s), -30.0);
  EXPECT_LE(space_form_deviation(s.R, -1.0), 0.0);
}

TEST(Zoo, SyntheticProductRicciClusters) {
  const auto s = zoo::synthetic_product({4, 2}, {-1.0, 1.0});
  const auto spec = ahlab::ricci_spectrum(s.S, s.J, 1e-9);
  ASSERT_EQ(spec.clusters.size(), 2u);
  EXPECT_EQ(spec.clusters[0].value, -3.0);
  EXPECT_EQ(spec.clusters[1].value, 1.0);
  EXPECT_EQ(zoo::scalar_curvature(s), -10.0);
}

TEST(Zoo, SyntheticSamplesSatisfyCurvatureSymmetries) {
  const auto s = zoo::synthetic_product({2, 4, 2}, {0.5, -2.0, 1.0});
  const int n = 8;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          EXPECT_EQ(s.R({a, b, c, d}), -s.R({b, a, c, d}));
          EXPECT_EQ(s.R({a, b, c, d}), s.R({c, d, a, b}));
          EXPECT_EQ(s.R({a, b, c, d}) + s.R({b, c, a, d}) + s.R({c, a, b, d}), 0.0);
        }
  // block-diagonal J keeps each factor's curvature J-invariant
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) EXPECT_EQ(s.J({a, b}), -s.J({b, a}));
}
