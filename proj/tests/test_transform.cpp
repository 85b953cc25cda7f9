#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "nijtoep/generator.hpp"
#include "nijtoep/transform.hpp"
#include "oracle_helpers.hpp"

using nijtoep::Error;
using nijtoep::ErrorKind;
using nijtoep::Expression;
using nijtoep::FieldOnGrid;
using nijtoep::Grid;
using nijtoep::GridFunction;
using nijtoep::OperatorFieldSpec;
using nijtoep::PushforwardReport;
using nijtoep::SysReport;
using nijtoep::TransformOptions;
using nijtoep::TransformResult;
using nijtoep::coordinate_names;
using nijtoep::generated_field;
using nijtoep::grid_sample;
using nijtoep::j_preserving_map;
using nijtoep::pushforward_check;
using nijtoep::run_algorithm;
using nijtoep::solve_omega;
using nijtoep::verify_sys;

namespace {

OperatorFieldSpec m_from(int n, const std::vector<std::string>& f_texts) {
  std::vector<Expression> f;
  for (const std::string& t : f_texts) f.push_back(Expression::parse(t, {"p", "q"}));
  return generated_field(n, std::move(f), false);
}

std::vector<Expression> zeros_r(int n) {
  std::vector<Expression> r;
  for (int i = 0; i + 1 < n; ++i) r.push_back(Expression::parse("0", {"x"}));
  return r;
}

OperatorFieldSpec direct_from(int n, const std::vector<std::string>& texts) {
  const auto coords = coordinate_names(n);
  std::vector<Expression> g;
  for (const std::string& t : texts) g.push_back(Expression::parse(t, coords));
  return nijtoep::direct_field(std::move(g));
}

}  // namespace

TEST_CASE("solve_omega on hand cases") {
  // n = 2, M = c J constant, dv = (0, 1): the single component is 1/c
  const auto grid = Grid::make(2, 10, 0.5);
  const double c = 2.5;
  const OperatorFieldSpec m_spec = m_from(2, {"2.5"});
  const FieldOnGrid m = nijtoep::eval_field_on_grid(m_spec, grid);
  std::vector<GridFunction> dv;
  dv.push_back(grid_sample(grid, [](std::span<const double>) { return 0.0; }));
  dv.push_back(grid_sample(grid, [](std::span<const double>) { return 1.0; }));
  const auto solved = solve_omega(m, std::span<const GridFunction>(dv));
  CHECK(solved.consistency == 0.0);
  REQUIRE(solved.omega.size() == 1);
  for (double v : solved.omega[0].values) CHECK(v == doctest::Approx(1.0 / c));

  // inconsistent data trips the guard on the first component
  dv[0] = grid_sample(grid, [](std::span<const double>) { return 0.5; });
  CHECK_THROWS_AS((void)solve_omega(m, std::span<const GridFunction>(dv)), Error);
}

TEST_CASE("solve_omega first level of the dimension-four example") {
  // M from (a, b, c); dv^4 = q(u4) du^4 gives omega = (0, 0, q/c)
  const auto grid = Grid::make(4, 8, 0.5);
  const OperatorFieldSpec m_spec = m_from(4, {"p - q", "q/2 + p^2", "1 + p/2 + q/4"});
  const FieldOnGrid m = nijtoep::eval_field_on_grid(m_spec, grid);

  const Expression q = Expression::parse("1 + x/2", {"x"});
  std::vector<GridFunction> dv;
  for (int a = 0; a < 3; ++a) dv.push_back(grid_sample(grid, [](std::span<const double>) { return 0.0; }));
  dv.push_back(nijtoep::grid_sample_axis(grid, q, 3));

  const auto solved = solve_omega(m, std::span<const GridFunction>(dv));
  REQUIRE(solved.omega.size() == 3);
  CHECK(solved.omega[0].max_abs() == 0.0);
  CHECK(solved.omega[1].max_abs() == 0.0);
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    const auto u = grid->point(flat);
    const double expected = (1 + u[3] / 2) / (1 + u[3] / 2 + u[2] / 4);
    CHECK(solved.omega[2].values[flat] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("solve_omega rejects vanishing regularity coefficients") {
  const auto grid = Grid::make(2, 8, 0.5);
  const OperatorFieldSpec m_spec = m_from(2, {"p"});  // m_1 = u2, zero at the origin
  const FieldOnGrid m = nijtoep::eval_field_on_grid(m_spec, grid);
  std::vector<GridFunction> dv;
  dv.push_back(grid_sample(grid, [](std::span<const double>) { return 0.0; }));
  dv.push_back(grid_sample(grid, [](std::span<const double>) { return 1.0; }));
  try {
    (void)solve_omega(m, std::span<const GridFunction>(dv));
    FAIL("expected RegularityViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RegularityViolation);
  }
}

TEST_CASE("run_algorithm solves the constant two-dimensional case exactly") {
  const auto grid = Grid::make(2, 12, 0.5);
  const double c = 2.0;
  const OperatorFieldSpec m_spec = m_from(2, {"2"});
  const Expression q = Expression::parse("1", {"x"});
  const auto r = zeros_r(2);
  const TransformResult result = run_algorithm(m_spec, q, std::span<const Expression>(r), grid);

  // v = (u1 / c, u2)
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    const auto u = grid->point(flat);
    CHECK(result.v[0].values[flat] == doctest::Approx(u[0] / c).epsilon(1e-13));
    CHECK(result.v[1].values[flat] == doctest::Approx(u[1]).epsilon(1e-13));
  }
  REQUIRE(result.sys.residuals.size() == 1);
  CHECK(result.sys.raw[0] <= 1e-12);
  CHECK(result.sys.min_dv1_du1 == doctest::Approx(1.0 / c));

  // pushforward of M is exactly J
  const PushforwardReport push = pushforward_check(std::span<const GridFunction>(result.v), m_spec);
  CHECK(push.max_vs_j < 1e-12);
}

TEST_CASE("run_algorithm on a polynomial three-dimensional field") {
  const auto grid = Grid::make(3, 24, 0.5);
  const OperatorFieldSpec m_spec = m_from(3, {"p", "1 + q"});
  const Expression q = Expression::parse("1 + x^2/2", {"x"});
  std::vector<Expression> r;
  r.push_back(Expression::parse("x^2/4", {"x"}));
  r.push_back(Expression::parse("sin(x)/8", {"x"}));

  const TransformResult result = run_algorithm(m_spec, q, std::span<const Expression>(r), grid);
  for (double res : result.sys.residuals) CHECK(res <= 1e-8);
  CHECK(result.sys.min_dv1_du1 > 1e-3);
  for (const auto& level : result.levels) {
    CHECK(level.consistency <= 1e-7);
    CHECK(level.closedness_sym <= 1e-7);
    CHECK(level.closedness_mm <= 1e-8);
  }

  // Jacobian structure: triangular, with diagonal ratio m_{n-1}
  CHECK(result.jacobian.max_subdiagonal <= 1e-7);
  CHECK(result.jacobian.max_diag_ratio_dev <= 1e-6);
  CHECK(result.jacobian.min_abs_det > 0.0);

  // negative control: replacing v^1 with junk blows up the first equation
  std::vector<GridFunction> broken(result.v.begin(), result.v.end());
  broken[0] = grid_sample(grid, [](std::span<const double> u) { return std::sin(5 * u[0] * u[2]); });
  const SysReport bad = verify_sys(std::span<const GridFunction>(broken), m_spec);
  CHECK(bad.residuals[0] > 1e-3);
}

TEST_CASE("verify_sys accepts the coordinates under J") {
  const auto grid = Grid::make(3, 10, 0.5);
  const OperatorFieldSpec j_gen = m_from(3, {"0", "1"});
  std::vector<GridFunction> coords;
  for (int a = 0; a < 3; ++a) {
    coords.push_back(grid_sample(grid, [a](std::span<const double> u) { return u[static_cast<std::size_t>(a)]; }));
  }
  const SysReport report = verify_sys(std::span<const GridFunction>(coords), j_gen);
  CHECK(report.raw[0] <= 1e-12);
  CHECK(report.raw[1] <= 1e-12);
  CHECK(report.min_dv1_du1 == doctest::Approx(1.0));
}

TEST_CASE("preconditions of the algorithm") {
  const auto grid = Grid::make(2, 10, 0.5);
  const auto r = zeros_r(2);

  // q must not vanish
  const OperatorFieldSpec m_spec = m_from(2, {"1"});
  const Expression zero_q = Expression::parse("0", {"x"});
  CHECK_THROWS_AS((void)run_algorithm(m_spec, zero_q, std::span<const Expression>(r), grid), Error);

  // the diagonal of M must be absent
  std::vector<Expression> with_diag;
  with_diag.push_back(Expression::parse("1", {"p", "q"}));
  with_diag.push_back(Expression::parse("x", {"x"}));
  const OperatorFieldSpec bad_m = generated_field(2, std::move(with_diag), true);
  const Expression one_q = Expression::parse("1", {"x"});
  CHECK_THROWS_AS((void)run_algorithm(bad_m, one_q, std::span<const Expression>(r), grid), Error);

  // m_{n-1} must stay away from zero on the grid
  const OperatorFieldSpec sing_m = m_from(2, {"p"});
  try {
    (void)run_algorithm(sing_m, one_q, std::span<const Expression>(r), grid);
    FAIL("expected RegularityViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RegularityViolation);
  }
}

TEST_CASE("pushforward on hand data") {
  const auto grid = Grid::make(2, 12, 0.5);
  const double c = 2.0;
  std::vector<GridFunction> v;
  v.push_back(grid_sample(grid, [c](std::span<const double> u) { return u[0] / c; }));
  v.push_back(grid_sample(grid, [](std::span<const double> u) { return u[1]; }));

  // the generating M goes to J exactly
  const OperatorFieldSpec m_spec = m_from(2, {"2"});
  CHECK(pushforward_check(std::span<const GridFunction>(v), m_spec).max_vs_j < 1e-13);

  // the identity is fixed by any invertible change
  const OperatorFieldSpec id_spec = direct_from(2, {"0", "1"});
  const PushforwardReport id_push = pushforward_check(std::span<const GridFunction>(v), id_spec);
  CHECK(id_push.max_off_toeplitz < 1e-13);
  CHECK(id_push.max_vs_j == doctest::Approx(0.5));  // Id is not J
}

TEST_CASE("pushforward keeps gl-regular Toeplitz fields Toeplitz") {
  const auto grid = Grid::make(3, 16, 0.5);
  const OperatorFieldSpec m_spec = m_from(3, {"p - 2*q", "1 + p/2 + q/4"});
  const Expression q = Expression::parse("1 + x/2", {"x"});
  const auto r = zeros_r(3);
  const TransformResult result = run_algorithm(m_spec, q, std::span<const Expression>(r), grid);

  const OperatorFieldSpec l1 = direct_from(3, {"u1 + u3", "1 + u2/2", "u3*u3"});
  const OperatorFieldSpec l2 = direct_from(3, {"sin(u2)", "1", "exp(u1)/4"});
  for (const OperatorFieldSpec* l : {&l1, &l2}) {
    const PushforwardReport push = pushforward_check(std::span<const GridFunction>(result.v), *l);
    CHECK(push.max_off_toeplitz <= 1e-6);
  }
}

TEST_CASE("J-preserving maps") {
  const auto grid = Grid::make(2, 12, 0.5);

  // h_n(x) = x, others zero: the identity map
  std::vector<Expression> h_id;
  h_id.push_back(Expression::parse("0", {"x"}));
  h_id.push_back(Expression::parse("x", {"x"}));
  const auto identity = j_preserving_map(2, std::span<const Expression>(h_id), grid);
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    const auto u = grid->point(flat);
    CHECK(identity.w[0].values[flat] == doctest::Approx(u[0]).epsilon(1e-13));
    CHECK(identity.w[1].values[flat] == doctest::Approx(u[1]).epsilon(1e-13));
  }

  // h_1(x) = x, h_2(x) = x: w = (u2 + u1, u2), Jacobian [[1,1],[0,1]]
  std::vector<Expression> h_shear;
  h_shear.push_back(Expression::parse("x", {"x"}));
  h_shear.push_back(Expression::parse("x", {"x"}));
  const auto shear = j_preserving_map(2, std::span<const Expression>(h_shear), grid);
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    const auto u = grid->point(flat);
    CHECK(shear.w[0].values[flat] == doctest::Approx(u[1] + u[0]).epsilon(1e-13));
    CHECK(shear.w[1].values[flat] == doctest::Approx(u[1]).epsilon(1e-13));
  }
  const OperatorFieldSpec j_spec = nijtoep::j_field_spec(2);
  CHECK(pushforward_check(std::span<const GridFunction>(shear.w), j_spec).max_vs_j < 1e-12);

  // random polynomial data with the Id-coefficient derivative bounded below
  oracle::Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.integer(2, 4);
    const auto g3 = Grid::make(n, 12, 0.5);
    std::vector<Expression> h;
    for (int i = 0; i + 1 < n; ++i) {
      h.push_back(Expression::parse(oracle::num(rng.uniform(-0.5, 0.5)) + "*x + " +
                                        oracle::num(rng.uniform(-0.5, 0.5)) + "*x^2",
                                    {"x"}));
    }
    h.push_back(Expression::parse(oracle::num(rng.uniform(0.3, 1.0)) + "*x + " +
                                      oracle::num(rng.uniform(-0.2, 0.2)) + "*x^2",
                                  {"x"}));
    const auto map = j_preserving_map(n, std::span<const Expression>(h), g3);
    CHECK(map.min_h_n_prime >= 0.1);
    CHECK(map.min_abs_det > 0.0);
    const OperatorFieldSpec jn = nijtoep::j_field_spec(n);
    CHECK(pushforward_check(std::span<const GridFunction>(map.w), jn).max_vs_j <= 1e-8);
  }
}

TEST_CASE("composition with a J-preserving map still solves the system") {
  const auto grid = Grid::make(3, 20, 0.5);
  const OperatorFieldSpec m_spec = m_from(3, {"p", "1 + q/2"});
  const Expression q = Expression::parse("1 + x/4", {"x"});
  const auto r = zeros_r(3);
  const TransformResult result = run_algorithm(m_spec, q, std::span<const Expression>(r), grid);

  std::vector<Expression> h;
  h.push_back(Expression::parse("x/4", {"x"}));
  h.push_back(Expression::parse("x^2/8", {"x"}));
  h.push_back(Expression::parse("x + x^2/4", {"x"}));
  const auto composed =
      nijtoep::compose_j_preserving(std::span<const Expression>(h), std::span<const GridFunction>(result.v));
  const SysReport report = verify_sys(std::span<const GridFunction>(composed), m_spec);
  for (double res : report.residuals) CHECK(res <= 1e-7);
  CHECK(report.min_dv1_du1 > 1e-4);
}

TEST_CASE("dimension-four data reproduces the closed form for v_3") {
  const auto grid = Grid::make(4, 16, 0.5);
  // a = p - q, b = q/2 + p^2, c = 1 + p/2 + q/4; q(u4) = 1 + u4/2; s_3 = u4^2/4
  const OperatorFieldSpec m_spec = m_from(4, {"p - q", "q/2 + p^2", "1 + p/2 + q/4"});
  const Expression q = Expression::parse("1 + x/2", {"x"});
  std::vector<Expression> r = zeros_r(4);
  r[2] = Expression::parse("x^2/4", {"x"});

  const TransformResult result = run_algorithm(m_spec, q, std::span<const Expression>(r), grid);
  for (double res : result.sys.residuals) CHECK(res <= 1e-8);

  // v_3(u4, u3) = int_0^{u3} q(u4) / c(u4, tau) dtau + s_3(u4), with
  // c(u4, tau) = 1 + u4/2 + tau/4. The quadrature oracle and the hand
  // antiderivative 4 q(u4) [log(1 + u4/2 + u3/4) - log(1 + u4/2)] agree.
  for (std::size_t flat = 0; flat < grid->size(); flat += 7) {
    const auto u = grid->point(flat);
    const double u3 = u[2], u4 = u[3];
    const double qv = 1 + u4 / 2;
    const auto integrand = [&](double tau) { return qv / (1 + u4 / 2 + tau / 4); };
    const double by_quadrature = oracle::adaptive_simpson(integrand, 0.0, u3) + u4 * u4 / 4;
    const double by_logs = 4 * qv * (std::log(1 + u4 / 2 + u3 / 4) - std::log(1 + u4 / 2)) + u4 * u4 / 4;
    CHECK(std::abs(by_quadrature - by_logs) < 1e-10);
    CHECK(std::abs(result.v[2].values[flat] - by_quadrature) < 1e-8);
  }
}
