#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ahlab/expr.hpp"
#include "oracle.hpp"

using ahlab::Expr;
using ahlab::parse;

namespace {

double eval(const Expr& e, std::vector<double> x, const ahlab::Bindings& b = {}) {
  return ahlab::evaluate<double>(e, std::span<const double>(x), b);
}

std::size_t error_offset(const std::string& text, int dim, const std::set<std::string, std::less<>>& params = {}) {
  try {
    parse(text, dim, params);
  } catch (const ahlab::ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no error for '" << text << "'";
  return 0;
}

}  // namespace

TEST(Expr, ConformalFactorParsesWithDivisionAtTop) {
  const Expr e = parse("4/(1 + c*(x1^2 + x2^2))^2", 2, {"c"});
  ASSERT_EQ(e.kind(), Expr::Kind::binary);
  EXPECT_EQ(e.binary_op(), Expr::Binary::div);
  EXPECT_EQ(e.rhs().binary_op(), Expr::Binary::pow);
  EXPECT_NEAR(eval(e, {0.5, 0.5}, {{"c", 2.0}}), 4.0 / 4.0, 1e-15);
}

TEST(Expr, CoordinateOutOfRange) {
  EXPECT_THROW(parse("x3", 2), ahlab::ParseError);
  EXPECT_THROW(parse("x0", 2), ahlab::ParseError);
}

TEST(Expr, UnknownIdentifierIsNamed) {
  try {
    parse("sin(x1*x2) + q", 2, {});
    FAIL() << "expected ParseError";
  } catch (const ahlab::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'q'"), std::string::npos) << e.what();
    EXPECT_EQ(e.offset(), 13u);
  }
}

TEST(Expr, SyntaxErrorsCarryOffsets) {
  EXPECT_EQ(error_offset("x1 + * x2", 2), 5u);
  EXPECT_EQ(error_offset("(x1 + x2", 2), 8u);
  EXPECT_EQ(error_offset("x1 x2", 2), 3u);
  EXPECT_EQ(error_offset("sin x1", 2), 4u);
  EXPECT_EQ(error_offset("x1^x2", 2), 2u);
  EXPECT_THROW(parse("", 2), ahlab::ParseError);
  EXPECT_THROW(parse("   ", 2), ahlab::ParseError);
  EXPECT_THROW(parse("1.2.3", 2), ahlab::ParseError);
}

TEST(Expr, SubtractionIsLeftAssociative) {
  EXPECT_TRUE(parse("a - b - c", 1, {"a", "b", "c"}) == parse("(a - b) - c", 1, {"a", "b", "c"}));
  EXPECT_FALSE(parse("a - b - c", 1, {"a", "b", "c"}) == parse("a - (b - c)", 1, {"a", "b", "c"}));
  EXPECT_TRUE(parse("a / b / c", 1, {"a", "b", "c"}) == parse("(a / b) / c", 1, {"a", "b", "c"}));
}

TEST(Expr, Precedence) {
  EXPECT_TRUE(parse("-x1^2", 1) == parse("-(x1^2)", 1));
  EXPECT_TRUE(parse("x1 + x1*x1", 1) == parse("x1 + (x1*x1)", 1));
  EXPECT_TRUE(parse("2*x1^3", 1) == parse("2*(x1^3)", 1));
  EXPECT_TRUE(parse("x1^2^3", 1) == parse("(x1^2)^3", 1));
  EXPECT_TRUE(parse("x1^-2", 1) == parse("x1^(-2)", 1));
  EXPECT_NEAR(eval(parse("-x1^2", 1), {3.0}), -9.0, 0.0);
  EXPECT_NEAR(eval(parse("2^-1", 1), {0.0}), 0.5, 0.0);
}

TEST(Expr, WhitespaceIsInsignificant) {
  EXPECT_TRUE(parse("  sin ( x1 )*x2+ 3 ", 2) == parse("sin(x1)*x2+3", 2));
}

TEST(Expr, ExponentMustBeConstant) {
  EXPECT_THROW(parse("2^x1", 1), ahlab::ParseError);
  EXPECT_NO_THROW(parse("x1^c", 1, {"c"}));
}

TEST(Expr, EvalJetConstantTerms) {
  const std::vector<double> p1{0.0, 5.0};
  EXPECT_EQ(ahlab::eval_jet<4>(parse("x1*x2 + sin(x1)", 2), p1, {}).value(), 0.0);
  const std::vector<double> p2{0.0, 0.0};
  EXPECT_EQ(ahlab::eval_jet<4>(parse("4/(1 + (x1^2+x2^2))^2", 2), p2, {}).value(), 4.0);
}

TEST(Expr, ConstantHasNoHigherCoefficients) {
  const std::vector<double> p{0.3, -0.2, 0.1};
  const auto j = ahlab::eval_jet<4>(parse("sqrt(2) * exp(1) - 3^2", 3), p, {});
  EXPECT_EQ(j.variables(), 3);
  for (std::size_t k = 1; k < j.coefficients().size(); ++k) EXPECT_EQ(j.coefficients()[k], 0.0);
}

TEST(Expr, EvaluationDomainErrors) {
  const std::vector<double> p{0.0};
  EXPECT_THROW(ahlab::eval_jet<4>(parse("sqrt(x1 - 1)", 1), p, {}), ahlab::DomainError);
  EXPECT_THROW(ahlab::eval_jet<4>(parse("1/x1", 1), p, {}), ahlab::DomainError);
  EXPECT_THROW(ahlab::eval_jet<4>(parse("(x1 - 1)^0.5", 1), p, {}), ahlab::DomainError);
  EXPECT_THROW(eval(parse("c*x1", 1, {"c"}), {1.0}), ahlab::DomainError);
}

TEST(Expr, PrintParseIsAFixedPoint) {
  const std::vector<std::string> samples = {
      "4/(1 + c*(x1^2 + x2^2))^2", "-x1^2", "(-x1)^2", "x1 - (x2 - 3)", "x1/(x2*x1)", "-(-x1)",
      "2^-1", "x1^2^3", "x1^(2^3)", "-1.5e-7*x2", "sqrt(1 - (x1*x1 + x2*x2))", "x1 - -x2", "0.1 + 0.2"};
  for (const auto& s : samples) {
    const Expr e = parse(s, 2, {"c"});
    const std::string printed = ahlab::to_string(e);
    const Expr again = parse(printed, 2, {"c"});
    EXPECT_TRUE(e == again) << s << " -> " << printed;
    EXPECT_EQ(ahlab::to_string(again), printed);
  }
}

// Generated trees may hold negative constants, which print as negations; the
// fixed point starts from the first parse.
TEST(Expr, RandomExpressionsRoundTrip) {
  std::mt19937_64 pts(8);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int n : {1, 3, 6}) {
    oracle::RandomExpr gen(n, 7 + static_cast<std::uint64_t>(n));
    for (int trial = 0; trial < 100; ++trial) {
      const Expr raw = gen(4);
      const Expr e = parse(ahlab::to_string(raw), n);
      const std::string printed = ahlab::to_string(e);
      EXPECT_TRUE(e == parse(printed, n)) << printed;
      std::vector<double> x(static_cast<std::size_t>(n));
      for (auto& v : x) v = u(pts);
      const double a = eval(raw, x);
      if (!std::isfinite(a)) continue;
      EXPECT_NEAR(eval(e, x), a, 1e-12 * (1 + std::abs(a))) << printed;
    }
  }
}

TEST(Expr, ShiftAndRename) {
  const Expr e = parse("c*x1 + x2", 2, {"c"});
  const Expr s = ahlab::shift_coordinates(e, 2);
  EXPECT_EQ(ahlab::to_string(s), "c*x3 + x4");
  const Expr r = ahlab::rename_parameter(e, "c", "c_2");
  EXPECT_EQ(ahlab::to_string(r), "c_2*x1 + x2");
  std::set<std::string, std::less<>> names;
  ahlab::collect_parameters(r, names);
  EXPECT_EQ(names, (std::set<std::string, std::less<>>{"c_2"}));
}

TEST(Expr, JetDerivativesMatchFiniteDifferencesWithParameters) {
  const Expr e = parse("4/(1 + c*(x1^2 + x2^2))^2 + sin(x1*x2)*exp(x2/2)", 2, {"c"});
  const ahlab::Bindings b{{"c", 0.7}};
  const std::vector<double> p{0.31, -0.42};
  const auto jet = ahlab::eval_jet<4>(e, p, b);
  oracle::FiniteDifference fd(oracle::as_function(e, b), p);
  for (const auto& a : oracle::multi_indices(2, 3)) {
    const double got = jet.derivative(oracle::to_multi_index(a));
    const double want = fd(a);
    EXPECT_TRUE(oracle::close(got, want, 1e-6, 1e-9)) << got << " vs " << want;
  }
}
