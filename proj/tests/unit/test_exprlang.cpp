#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "mjr/exprlang.hpp"

namespace {

double ev(const char* text, double t = 0.0, double x = 0.0) { return mjr::parse(text).eval(t, x); }

TEST(ExprParse, SineAtQuarter) { EXPECT_NEAR(ev("2 + 0.5*sin(2*pi*t)", 0.25), 2.5, 1e-15); }

TEST(ExprParse, ExpDecayAtZero) { EXPECT_DOUBLE_EQ(ev("3 - 2*exp(-t/4)", 0.0), 1.0); }

TEST(ExprParse, SawtoothAtInteger) { EXPECT_DOUBLE_EQ(ev("7*t - floor(7*t)", 1.0), 0.0); }

TEST(ExprEval, StateDependentSawtooth) {
  EXPECT_NEAR(ev("x*(7*t - floor(7*t)) + 0.1", 0.5, 4.0), 2.1, 1e-12);
}

TEST(ExprEval, ArrivalRateAtZero) {
  EXPECT_NEAR(ev("35 + 10*cos(2*pi/3*t) + 10*cos(4*pi/3*(t+3/8)) + min(t,36)", 0.0), 45.0, 1e-12);
}

TEST(ExprEval, MinSaturates) { EXPECT_DOUBLE_EQ(ev("min(t, 36)", 100.0), 36.0); }

TEST(ExprPrecedence, PowerBindsTighterThanProduct) { EXPECT_DOUBLE_EQ(ev("2+3*4^2"), 50.0); }

TEST(ExprPrecedence, UnaryMinusLooserThanPower) { EXPECT_DOUBLE_EQ(ev("-2^2"), -4.0); }

TEST(ExprPrecedence, PowerIsRightAssociative) { EXPECT_DOUBLE_EQ(ev("2^3^2"), 512.0); }

TEST(ExprPrecedence, SubtractionIsLeftAssociative) {
  EXPECT_DOUBLE_EQ(ev("10-4-3"), 3.0);
  EXPECT_DOUBLE_EQ(ev("64/4/2"), 8.0);
}

TEST(ExprErrors, SyntaxErrorCarriesOffset) {
  try {
    mjr::parse("1 + * 2");
    FAIL() << "expected a parse error";
  } catch (const mjr::ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(ExprErrors, UnknownIdentifier) {
  EXPECT_THROW(mjr::parse("y + 1"), mjr::ParseError);
  EXPECT_THROW(mjr::parse("foo(1)"), mjr::ParseError);
}

TEST(ExprErrors, WrongArity) {
  EXPECT_THROW(mjr::parse("min(1)"), mjr::ParseError);
  EXPECT_THROW(mjr::parse("sin(1, 2)"), mjr::ParseError);
}

TEST(ExprErrors, DomainErrorsAreNotInfinities) {
  EXPECT_THROW(ev("1/(t-1)", 1.0), mjr::DomainError);
  EXPECT_THROW(ev("log(t)", 0.0), mjr::DomainError);
  EXPECT_THROW(ev("sqrt(t-1)", 0.0), mjr::DomainError);
}

TEST(ExprErrors, EmptyInput) { EXPECT_THROW(mjr::parse(""), mjr::ParseError); }

// Random ASTs printed and re-parsed must evaluate identically.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 12);
  std::uniform_real_distribution<double> lit(-5.0, 5.0);
  switch (pick(rng)) {
    case 0: return mjr::expr::format_double(lit(rng));
    case 1: return "t";
    case 2: return "x";
    case 3: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
    case 4: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
    case 5: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
    case 6: return "(" + random_expr(rng, depth - 1) + " / " + random_expr(rng, depth - 1) + ")";
    case 7: return "-" + random_expr(rng, depth - 1);
    case 8: return "sin(" + random_expr(rng, depth - 1) + ")";
    case 9: return "abs(" + random_expr(rng, depth - 1) + ")^2";
    case 10: return "min(" + random_expr(rng, depth - 1) + ", " + random_expr(rng, depth - 1) + ")";
    case 11: return "floor(" + random_expr(rng, depth - 1) + ")";
    default: return "exp(cos(" + random_expr(rng, depth - 1) + "))";
  }
}

TEST(ExprRoundTrip, RandomTreesSurvivePrintAndParse) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> pt(0.0, 10.0);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const mjr::Expr a = mjr::parse(random_expr(rng, 5));
    const std::string printed = a.print();
    const mjr::Expr b = mjr::parse(printed);
    EXPECT_EQ(b.print(), printed);
    for (int k = 0; k < 100; ++k) {
      const double t = pt(rng);
      const double x = std::floor(pt(rng));
      double va = 0.0;
      try {
        va = a.eval(t, x);
      } catch (const mjr::DomainError&) {
        EXPECT_THROW(b.eval(t, x), mjr::DomainError);
        continue;
      }
      EXPECT_EQ(va, b.eval(t, x)) << printed;
      ++compared;
    }
  }
  EXPECT_GT(compared, 50000);
}

TEST(TimeFunction, RescaledMatchesComposition) {
  const mjr::TimeFunction f("2 + sin(2*pi*t)");
  const auto g = f.rescaled(3.0, 3.0);
  EXPECT_NEAR(g(0.1), 3.0 * f(0.3), 1e-14);
  const mjr::TimeFunction h(g.print());
  EXPECT_NEAR(h(0.1), g(0.1), 1e-14);
}

TEST(TimeFunction, ConstantsAreCached) {
  const mjr::TimeFunction c("2*3");
  EXPECT_TRUE(c.is_constant());
  EXPECT_DOUBLE_EQ(c(123.0), 6.0);
}

}  // namespace
