#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ahlab/analysis.hpp"
#include "ahlab/sampling.hpp"
#include "ahlab/zoo.hpp"
#include "oracle.hpp"

using ahlab::Chart;
using ahlab::Status;
using ahlab::TheoremCase;

namespace {

std::vector<std::vector<double>> points(const Chart& c, int count) {
  return ahlab::halton_points(c.domain, count, 0x5eedULL + static_cast<std::uint64_t>(c.dim));
}

std::vector<Chart> all_zoo() {
  return {ahlab::zoo::flat_kahler(3),      ahlab::zoo::sphere2(1.0),      ahlab::zoo::hyperbolic(2, 1.0),
          ahlab::zoo::hyperbolic(4, 1.0),  ahlab::zoo::fubini_study_cp2(), ahlab::zoo::kodaira_thurston(),
          ahlab::zoo::s6_nearly_kahler(), ahlab::zoo::product_s2_h2(1.0)};
}

void expect_all_asserted_and_passing(const ahlab::IdentityReport& r, double tol, const std::string& what) {
  for (const auto& e : r.equations) {
    EXPECT_EQ(e.status, Status::asserted) << what << " " << e.id << " " << e.note;
    ASSERT_TRUE(e.residual.has_value()) << what << " " << e.id;
    EXPECT_LE(*e.residual, tol) << what << " " << e.id;
  }
}

ahlab::CurvatureSample scaled(ahlab::CurvatureSample s, double k) {
  for (auto& v : s.R.data()) v *= k;
  for (auto& v : s.S.data()) v *= k;
  return s;
}

}  // namespace

TEST(Classify, FlatComplexSpaceIsKahler) {
  const auto chart = ahlab::zoo::flat_kahler(3);
  for (const auto& c : ahlab::classify(chart, points(chart, 3), 1e-9)) {
    EXPECT_EQ(c.verdict(), "kahler");
    EXPECT_LE(c.kahler, 1e-9);
    EXPECT_LE(c.nearly_kahler, 1e-9);
    EXPECT_LE(c.almost_kahler, 1e-9);
    EXPECT_LE(c.identity_12, 1e-9);
    for (int i = 1; i <= 3; ++i) EXPECT_TRUE(c.in_class(i));
  }
}

TEST(Classify, KodairaThurstonIsStrictlyAlmostKahler) {
  const auto chart = ahlab::zoo::kodaira_thurston();
  for (const auto& c : ahlab::classify(chart, points(chart, 5), 1e-9)) {
    EXPECT_EQ(c.verdict(), "almost_kahler");
    EXPECT_LE(c.almost_kahler, 1e-9);
    EXPECT_GT(c.kahler, 0.1);
    EXPECT_GT(c.nearly_kahler, 0.1);
  }
}

TEST(Classify, SixSphereIsStrictlyNearlyKahlerOfClassTwo) {
  const auto chart = ahlab::zoo::s6_nearly_kahler();
  for (const auto& c : ahlab::classify(chart, points(chart, 3), 1e-6)) {
    EXPECT_EQ(c.verdict(), "nearly_kahler");
    EXPECT_LE(c.nearly_kahler, 1e-6);
    EXPECT_GT(c.kahler, 0.1);
    EXPECT_GT(c.almost_kahler, 0.1);
    EXPECT_LE(c.curvature_class[1], 1e-6);
    EXPECT_LE(c.identity_12, 1e-6);
  }
}

TEST(Classify, HierarchiesHoldEverywhere) {
  std::mt19937_64 rng(51);
  auto charts = all_zoo();
  charts.push_back(oracle::conformal_chart(oracle::random_polynomial(4, 3, 0.3, rng), 4));
  for (const auto& chart : charts) {
    for (const auto& c : ahlab::classify(chart, points(chart, 3), 1e-6)) {
      if (c.is_kahler()) {
        EXPECT_TRUE(c.is_nearly_kahler() && c.is_almost_kahler()) << chart.name;
        EXPECT_LE(c.identity_12, c.tol) << chart.name;
        for (int i = 1; i <= 3; ++i) EXPECT_TRUE(c.in_class(i)) << chart.name;
      }
      if (c.in_class(1)) EXPECT_TRUE(c.in_class(2)) << chart.name;
      if (c.in_class(2)) EXPECT_TRUE(c.in_class(3)) << chart.name;
    }
  }
}

TEST(Classify, StrictAlmostKahlerIsNotNearlyKahlerAndViceVersa) {
  const auto kt = ahlab::classify(ahlab::zoo::kodaira_thurston(), points(ahlab::zoo::kodaira_thurston(), 1), 1e-6)[0];
  EXPECT_FALSE(kt.is_nearly_kahler());
  const auto s6 = ahlab::classify(ahlab::zoo::s6_nearly_kahler(), points(ahlab::zoo::s6_nearly_kahler(), 1), 1e-6)[0];
  EXPECT_FALSE(s6.is_almost_kahler());
}

// The universal identities hold on every chart, almost Kaehler or not.
TEST(Identities, UniversalOnZooAndRandomConformalMetrics) {
  for (const auto& chart : all_zoo()) {
    for (const auto& p : points(chart, 2)) {
      expect_all_asserted_and_passing(ahlab::check_universal(ahlab::curvature_bundle(chart, p), 1e-6), 1e-6, chart.name);
    }
  }
  std::mt19937_64 rng(52);
  for (int n : {4, 6, 8}) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto chart = oracle::conformal_chart(oracle::random_polynomial(n, 3, 0.3, rng), n, 0.4);
      const auto b = ahlab::curvature_bundle(chart, points(chart, 1)[0]);
      expect_all_asserted_and_passing(ahlab::check_universal(b, 1e-6), 1e-6, "conformal " + std::to_string(n));
    }
  }
}

TEST(Identities, UniversalIsExactlyZeroOnFlatSpace) {
  const auto chart = ahlab::zoo::flat_kahler(2);
  const auto r = ahlab::check_universal(ahlab::curvature_bundle(chart, points(chart, 1)[0]), 1e-6);
  for (const auto& e : r.equations) EXPECT_EQ(*e.residual, 0.0) << e.id;
  const auto a = ahlab::check_ak2(ahlab::curvature_bundle(chart, points(chart, 1)[0]), 1e-6);
  for (const auto& e : a.equations) EXPECT_EQ(*e.residual, 0.0) << e.id;
}

TEST(Identities, AkTwoIdentitiesHoldOnKahlerCharts) {
  for (const auto& chart : {ahlab::zoo::sphere2(1.0), ahlab::zoo::fubini_study_cp2(), ahlab::zoo::product_s2_h2(1.0)}) {
    for (const auto& p : points(chart, 2)) {
      const auto r = ahlab::check_ak2(ahlab::curvature_bundle(chart, p), 1e-8);
      EXPECT_TRUE(r.applicable);
      expect_all_asserted_and_passing(r, 1e-8, chart.name);
    }
  }
}

// Identity 2) on the Kodaira-Thurston structure is measured, never assumed.
TEST(Identities, KodairaThurstonClassTwoIsMeasured) {
  const auto chart = ahlab::zoo::kodaira_thurston();
  for (const auto& p : points(chart, 3)) {
    const auto r = ahlab::check_ak2(ahlab::curvature_bundle(chart, p), 1e-6);
    ASSERT_TRUE(r.hypothesis_class2.has_value());
    ASSERT_TRUE(r.hypothesis_almost_kahler.has_value());
    EXPECT_LE(*r.hypothesis_almost_kahler, 1e-9);
    const bool holds = *r.hypothesis_class2 <= 1e-6;
    for (const auto& e : r.equations) {
      EXPECT_EQ(e.status, holds ? Status::asserted : Status::informational) << e.id;
      ASSERT_TRUE(e.residual.has_value());
      if (holds) EXPECT_LE(*e.residual, 1e-6) << e.id;
    }
    EXPECT_FALSE(r.failed());
  }
}

TEST(RicciSpectrum, EinsteinChartsHaveOneCluster) {
  for (const auto& [chart, value] : std::vector<std::pair<Chart, double>>{
           {ahlab::zoo::fubini_study_cp2(), 6.0}, {ahlab::zoo::s6_nearly_kahler(), 5.0}, {ahlab::zoo::hyperbolic(4, 1.0), -3.0}}) {
    const auto s = ahlab::ricci_spectrum(ahlab::curvature_bundle(chart, points(chart, 1)[0]), 1e-6);
    ASSERT_EQ(s.clusters.size(), 1u) << chart.name;
    EXPECT_EQ(s.clusters[0].multiplicity(), chart.dim);
    EXPECT_NEAR(s.clusters[0].value, value, 1e-7) << chart.name;
  }
}

TEST(RicciSpectrum, ProductHasTwoClustersAtPlusMinusC) {
  for (double c : {1.0, 0.6}) {
    const auto chart = ahlab::zoo::product_s2_h2(c);
    for (const auto& p : points(chart, 3)) {
      const auto b = ahlab::curvature_bundle(chart, p);
      const auto s = ahlab::ricci_spectrum(b, 1e-6);
      ASSERT_EQ(s.clusters.size(), 2u);
      EXPECT_NEAR(s.clusters[0].value, -c, 1e-7);
      EXPECT_NEAR(s.clusters[1].value, c, 1e-7);
      EXPECT_EQ(s.clusters[0].multiplicity(), 2);
      EXPECT_EQ(s.clusters[1].multiplicity(), 2);
      EXPECT_NEAR(b.scalar, 0.0, 1e-9);
      // adapted eigenframe: orthonormal, J-paired, diagonalizes S
      const int n = 4;
      const auto& e = s.frame;
      const auto& J = b.in_frame.J;
      for (int i = 0; i < 2; ++i)
        for (int r = 0; r < n; ++r) {
          double je = 0.0;
          for (int a = 0; a < n; ++a) je += e(a, i) * J({a, r});
          EXPECT_NEAR(e(r, i + 2), je, 1e-12);
        }
      EXPECT_LE(ahlab::max_abs(e.transposed() * e - ahlab::Matrix<double>::identity(n)), 1e-12);
      EXPECT_LE(s.eigen_residual, 1e-9);
    }
  }
}

TEST(RicciSpectrum, NonJInvariantRicciIsRejected) {
  auto sample = ahlab::zoo::synthetic_product({4, 2}, {-1.0, 1.0});
  auto S = sample.S;
  S({0, 1}) += 1e-3;
  S({1, 0}) += 1e-3;
  EXPECT_THROW(ahlab::ricci_spectrum(S, sample.J, 1e-6), ahlab::GeometryError);
  EXPECT_NO_THROW(ahlab::ricci_spectrum(sample.S, sample.J, 1e-6));
}

TEST(RicciSpectrum, SyntheticProductClusters) {
  const auto sample = ahlab::zoo::synthetic_product({4, 2}, {-1.0, 1.0});
  const auto s = ahlab::ricci_spectrum(sample.S, sample.J, 1e-9);
  ASSERT_EQ(s.clusters.size(), 2u);
  EXPECT_NEAR(s.clusters[0].value, -3.0, 1e-12);
  EXPECT_EQ(s.clusters[0].multiplicity(), 4);
  EXPECT_NEAR(s.clusters[1].value, 1.0, 1e-12);
  EXPECT_EQ(s.clusters[1].multiplicity(), 2);
}

TEST(Chain, FlatComplexSpaceSatisfiesEveryEquation) {
  const auto chart = ahlab::zoo::flat_kahler(3);
  const auto r = ahlab::check_cf_ak2_chain(ahlab::curvature_bundle(chart, points(chart, 1)[0]), 1e-8);
  EXPECT_TRUE(r.applicable);
  for (const auto& e : r.equations) {
    if (e.id == "3.11") {
      EXPECT_EQ(e.status, Status::not_applicable);
      continue;
    }
    EXPECT_EQ(e.status, Status::asserted) << e.id;
    EXPECT_LE(*e.residual, 1e-8) << e.id;
  }
  EXPECT_EQ(r.residual("nablaS"), 0.0);
}

TEST(Chain, SurfaceProductSatisfiesEveryEquation) {
  for (double c : {1.0, 0.5}) {
    const auto chart = ahlab::zoo::product_s2_h2(c);
    for (const auto& p : points(chart, 3)) {
      const auto b = ahlab::curvature_bundle(chart, p);
      const auto r = ahlab::check_cf_ak2_chain(b, 1e-6);
      EXPECT_TRUE(r.applicable);
      ASSERT_TRUE(r.hypothesis_conformal_flat.has_value());
      EXPECT_LE(*r.hypothesis_conformal_flat, 1e-7);
      const std::vector<std::string> ids = {"sprime", "3.1", "3.2", "dtau", "3.3", "3.4", "3.5", "3.6",
                                            "3.7",    "3.8", "3.9", "3.10", "3.11", "nablaS"};
      for (const auto& id : ids) EXPECT_NE(r.find(id), nullptr) << id;
      expect_all_asserted_and_passing(r, 1e-6, chart.name);
    }
  }
}

TEST(Chain, FubiniStudyIsNotApplicable) {
  const auto chart = ahlab::zoo::fubini_study_cp2();
  for (const auto& p : points(chart, 2)) {
    const auto r = ahlab::check_cf_ak2_chain(ahlab::curvature_bundle(chart, p), 1e-6);
    EXPECT_FALSE(r.applicable);
    ASSERT_TRUE(r.hypothesis_conformal_flat.has_value());
    EXPECT_GT(*r.hypothesis_conformal_flat, 0.01);
    for (const auto& e : r.equations) EXPECT_NE(e.status, Status::asserted) << e.id;
    EXPECT_FALSE(r.failed());
  }
}

TEST(Matcher, FlatComplexThreeSpaceIsCaseA) {
  const auto chart = ahlab::zoo::flat_kahler(3);
  const auto m = ahlab::theorem_case_match(ahlab::summarize(chart, points(chart, 3), 1e-6));
  EXPECT_EQ(m.label, TheoremCase::case_a);
  EXPECT_FALSE(m.inconsistent);
}

TEST(Matcher, SyntheticProfiles) {
  using ahlab::zoo::synthetic_product;
  using ahlab::zoo::synthetic_space_form;
  using ahlab::zoo::synthetic_summary;
  const auto b = ahlab::theorem_case_match(synthetic_summary(synthetic_space_form(6, -1.0), 1e-6));
  EXPECT_EQ(b.label, TheoremCase::case_b);
  EXPECT_NEAR(*b.c, 1.0, 1e-12);

  const auto c = ahlab::theorem_case_match(synthetic_summary(synthetic_product({4, 2}, {-1.0, 1.0}), 1e-6));
  EXPECT_EQ(c.label, TheoremCase::case_c);
  ASSERT_TRUE(c.mixed_plane.has_value());
  EXPECT_LE(*c.mixed_plane, 1e-9);
  EXPECT_EQ(c.factor_dims, (std::vector<int>{4, 2}));

  const auto d = ahlab::theorem_case_match(synthetic_summary(synthetic_product({6, 2}, {-1.0, 1.0}), 1e-6));
  EXPECT_EQ(d.label, TheoremCase::case_d);
  EXPECT_FALSE(d.inconsistent);

  const auto e = ahlab::theorem_case_match(synthetic_summary(synthetic_space_form(8, -1.0), 1e-6));
  EXPECT_EQ(e.label, TheoremCase::einstein_space_form);
  EXPECT_TRUE(e.inconsistent);

  const auto a = ahlab::theorem_case_match(synthetic_summary(synthetic_space_form(6, 0.0), 1e-6));
  EXPECT_EQ(a.label, TheoremCase::case_a);
}

TEST(Matcher, UnmatchedProfilesCarryDiagnostics) {
  using ahlab::zoo::synthetic_product;
  using ahlab::zoo::synthetic_summary;
  const auto flipped = ahlab::theorem_case_match(synthetic_summary(synthetic_product({4, 2}, {1.0, -1.0}), 1e-6));
  EXPECT_EQ(flipped.label, TheoremCase::not_applicable);
  EXPECT_FALSE(flipped.diagnostics.empty());
  const auto unbalanced = ahlab::theorem_case_match(synthetic_summary(synthetic_product({4, 2}, {-1.0, 2.0}), 1e-6));
  EXPECT_EQ(unbalanced.label, TheoremCase::not_applicable);
  EXPECT_FALSE(unbalanced.diagnostics.empty());
  const auto no_flags =
      ahlab::theorem_case_match(synthetic_summary(ahlab::zoo::synthetic_space_form(6, -1.0), 1e-6, false));
  EXPECT_EQ(no_flags.label, TheoremCase::not_applicable);
  const auto low_dim = ahlab::theorem_case_match(synthetic_summary(ahlab::zoo::synthetic_space_form(4, -1.0), 1e-6));
  EXPECT_EQ(low_dim.label, TheoremCase::not_applicable);
}

TEST(Matcher, NonConformallyFlatChartIsNotApplicable) {
  const auto chart = ahlab::zoo::s6_nearly_kahler();
  const auto m = ahlab::theorem_case_match(ahlab::summarize(chart, points(chart, 2), 1e-6));
  EXPECT_EQ(m.label, TheoremCase::not_applicable);
  EXPECT_FALSE(m.diagnostics.empty());
}

TEST(Matcher, LabelsAreScaleInvariant) {
  using ahlab::zoo::synthetic_product;
  using ahlab::zoo::synthetic_space_form;
  using ahlab::zoo::synthetic_summary;
  const std::vector<ahlab::CurvatureSample> samples = {synthetic_space_form(6, -1.0), synthetic_space_form(6, 0.0),
                                                       synthetic_product({4, 2}, {-1.0, 1.0}),
                                                       synthetic_product({6, 2}, {-1.0, 1.0}),
                                                       synthetic_space_form(8, -1.0), synthetic_product({4, 2}, {1.0, -1.0})};
  for (const auto& s : samples) {
    const auto base = ahlab::theorem_case_match(synthetic_summary(s, 1e-6));
    for (double k : {0.01, 0.5, 7.0, 300.0}) {
      const auto m = ahlab::theorem_case_match(synthetic_summary(scaled(s, k), 1e-6));
      EXPECT_EQ(m.label, base.label) << k;
      EXPECT_EQ(m.inconsistent, base.inconsistent);
      if (base.c && m.c) EXPECT_NEAR(*m.c, k * *base.c, 1e-9 * (1 + k));
    }
  }
}
