#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nijtoep/expression.hpp"

using nijtoep::Error;
using nijtoep::ErrorKind;
using nijtoep::Expression;
using nijtoep::Series;
using nijtoep::SyntaxError;
using nijtoep::TruncatedSeries;

namespace {

double eval1(const Expression& e, double x) { return e(std::span<const double>(&x, 1)); }

double eval2(const Expression& e, double p, double q) {
  const double values[2] = {p, q};
  return e(std::span<const double>(values, 2));
}

}  // namespace

TEST_CASE("parse and evaluate basic forms") {
  const Expression e = Expression::parse("p*q + 2", {"p", "q"});
  CHECK(eval2(e, 3, 4) == doctest::Approx(14.0));

  const Expression f = Expression::parse("exp(x)^2", {"x"});
  CHECK(eval1(f, 0.5) == doctest::Approx(std::exp(0.5) * std::exp(0.5)));

  CHECK(eval1(Expression::parse("pi", {"x"}), 0.0) == doctest::Approx(3.14159265358979));
  CHECK(eval1(Expression::parse("2 + 3*4^2", {"x"}), 0.0) == doctest::Approx(50.0));
  CHECK(eval1(Expression::parse("-x^2", {"x"}), 3.0) == doctest::Approx(-9.0));
  CHECK(eval1(Expression::parse("1 - 2 - 3", {"x"}), 0.0) == doctest::Approx(-4.0));
  CHECK(eval1(Expression::parse("sqrt(x)*sin(x) + cos(x)/log(x)", {"x"}), 2.0) ==
        doctest::Approx(std::sqrt(2.0) * std::sin(2.0) + std::cos(2.0) / std::log(2.0)));
  CHECK(eval1(Expression::parse("1.5e-2*x", {"x"}), 2.0) == doctest::Approx(0.03));
}

TEST_CASE("syntax errors carry byte offsets") {
  CHECK_THROWS_AS(Expression::parse("p*(", {"p", "q"}), SyntaxError);
  try {
    Expression::parse("p*(", {"p", "q"});
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(Expression::parse("", {"x"}), SyntaxError);
  CHECK_THROWS_AS(Expression::parse("x +", {"x"}), SyntaxError);
  CHECK_THROWS_AS(Expression::parse("x ^ q", {"x", "q"}), SyntaxError);  // non-literal exponent
  CHECK_THROWS_AS(Expression::parse("x ^ -2", {"x"}), SyntaxError);
  CHECK_THROWS_AS(Expression::parse("(x))", {"x"}), SyntaxError);
}

TEST_CASE("unknown identifiers") {
  try {
    Expression::parse("z + 1", {"x"});
    FAIL("expected UnknownVariable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownVariable);
  }
  try {
    Expression::parse("foo(x)", {"x"});
    FAIL("expected UnknownFunction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownFunction);
  }
}

TEST_CASE("evaluation over truncated series") {
  const Expression sq = Expression::parse("x^2", {"x"});
  const TruncatedSeries x = TruncatedSeries::variable(3, 3.0);
  const TruncatedSeries v = sq.eval<TruncatedSeries>(std::span<const TruncatedSeries>(&x, 1));
  CHECK(v.coeff(0) == doctest::Approx(9.0));
  CHECK(v.coeff(1) == doctest::Approx(6.0));
  CHECK(v.coeff(2) == doctest::Approx(1.0));

  const Expression inv = Expression::parse("1/p", {"p"});
  const TruncatedSeries pole = TruncatedSeries::variable(3, 0.0);
  CHECK_THROWS_AS((void)inv.eval<TruncatedSeries>(std::span<const TruncatedSeries>(&pole, 1)), Error);
  try {
    (void)inv.eval<TruncatedSeries>(std::span<const TruncatedSeries>(&pole, 1));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonUnitDivisor);
  }
}

TEST_CASE("pretty print round trips structurally") {
  const char* samples[] = {
      "p*q + 2",
      "exp(x)^2",
      "-x^2 + 4*x - 1",
      "1/(1 + x) - sqrt(x + 2)",
      "sin(pi*x) * cos(x/3)",
      "log(2 + x) + 0.125*x^3",
      "-(x + 1)*(x - 1)",
      "2.5e-3 + x^0",
  };
  for (const char* text : samples) {
    CAPTURE(text);
    const std::vector<std::string> vars = {"x", "p", "q"};
    const Expression parsed = Expression::parse(text, vars);
    const Expression reparsed = Expression::parse(parsed.pretty(), vars);
    CHECK(parsed.same_structure(reparsed));
  }
}

TEST_CASE("real evaluation equals order-1 series constant term exactly") {
  const std::vector<std::string> vars = {"p", "q"};
  const char* samples[] = {
      "p*q + 2",
      "p^3 - q^2/(1 + p*p)",
      "exp(p)*sin(q) + cos(p)",
      "sqrt(p + 2) + log(q + 3)",
  };
  const double pv = 0.37;
  const double qv = 1.25;
  for (const char* text : samples) {
    CAPTURE(text);
    const Expression e = Expression::parse(text, vars);
    const double real = eval2(e, pv, qv);
    const TruncatedSeries sp = TruncatedSeries::constant(1, pv);
    const TruncatedSeries sq = TruncatedSeries::constant(1, qv);
    const TruncatedSeries bound[2] = {sp, sq};
    const TruncatedSeries v = e.eval<TruncatedSeries>(std::span<const TruncatedSeries>(bound, 2));
    CHECK(v.coeff(0) == real);  // bitwise agreement
  }
}

TEST_CASE("binding must cover the declared variables") {
  const Expression e = Expression::parse("p + q", {"p", "q"});
  const double one = 1.0;
  CHECK_THROWS_AS((void)e(std::span<const double>(&one, 1)), Error);
}
