#include "nijtoep/chart.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nijtoep/errors.hpp"
#include "nijtoep/parallel.hpp"

namespace nijtoep {

namespace {

constexpr std::size_t kMaxGridSize = 64u * 1024u * 1024u;

// Chebyshev differentiation matrix on x_j = cos(j pi / N), j = 0..N, with the
// negative-sum trick on the diagonal (Trefethen's construction).
Matrix cheb_diff(int d) {
  const int N = d - 1;
  Matrix D(d, d);
  auto c = [&](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = std::cos(std::numbers::pi * j / N);
  for (int i = 0; i < d; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = (c(i) / c(j)) * sign / (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
      rowsum += D(i, j);
    }
    D(i, i) = -rowsum;
  }
  return D;
}

// Cumulative integration matrix: maps node values of f to node values of
// int_0^{u} f, built through Chebyshev coefficient space. The antiderivative
// of a degree-(d-1) interpolant has degree d, so the synthesis keeps the
// extra T_d term and node values of polynomial integrands stay exact.
Matrix cheb_integ(int d, double delta) {
  const int N = d - 1;

  // Synthesis T[j][k] = T_k(x_j) and its inverse (coefficient analysis).
  Matrix synth(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) synth(j, k) = std::cos(std::numbers::pi * j * k / N);
  }
  auto analysis = try_inverse(synth);
  if (!analysis) throw Error(ErrorKind::Precondition, "grid: Chebyshev analysis matrix is singular");

  // Coefficient-space antiderivative: b_1 = a_0 - a_2/2,
  // b_k = (a_{k-1} - a_{k+1}) / (2k) for k >= 2 (a_k = 0 past the data).
  Matrix step(d + 1, d);
  if (d >= 1) step(1, 0) = 1.0;
  if (d >= 3) step(1, 2) = -0.5;
  for (int k = 2; k <= N + 1; ++k) {
    if (k - 1 < d) step(k, k - 1) = 1.0 / (2.0 * k);
    if (k + 1 < d) step(k, k + 1) = -1.0 / (2.0 * k);
  }

  // Extended synthesis including T_{N+1}, evaluated at the nodes and at x = 1.
  Matrix synth_ext(d, d + 1);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k <= d; ++k) synth_ext(j, k) = std::cos(std::numbers::pi * j * k / N);
  }

  const Matrix coef = step * *analysis;      // values -> antiderivative coefficients
  const Matrix at_nodes = synth_ext * coef;  // antiderivative values at nodes

  // int_0^{u_i} f du = (delta/2) (F(1) - F(x_i)); x = 1 is node index 0.
  Matrix at_one(1, d);
  for (int k = 0; k <= d; ++k) {
    for (int j = 0; j < d; ++j) at_one(0, j) += coef(k, j);
  }
  Matrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out(i, j) = 0.5 * delta * (at_one(0, j) - at_nodes(i, j));
  }
  return out;
}

GridFunction apply_axis_matrix(const GridFunction& g, const Matrix& m, int axis) {
  const Grid& grid = *g.grid;
  const int d = grid.degree();
  const std::size_t stride = grid.stride(axis);
  const std::size_t block = stride * static_cast<std::size_t>(d);
  const std::size_t nblocks = grid.size() / block;

  GridFunction out;
  out.grid = g.grid;
  out.values.assign(grid.size(), 0.0);

  parallel_for(nblocks * stride, [&](std::size_t line) {
    const std::size_t b = line / stride;
    const std::size_t offset = line % stride;
    const std::size_t base = b * block + offset;
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        acc += m(i, j) * g.values[base + static_cast<std::size_t>(j) * stride];
      }
      out.values[base + static_cast<std::size_t>(i) * stride] = acc;
    }
  });
  return out;
}

void require_axis(const GridFunction& g, int axis) {
  if (!g.grid) throw Error(ErrorKind::Precondition, "grid function has no grid");
  if (axis < 0 || axis >= g.grid->dim())
    throw Error(ErrorKind::DimensionMismatch, "axis out of range");
}

std::string point_string(std::span<const double> u) {
  std::string s = "(";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(u[i]);
  }
  return s + ")";
}

}  // namespace

std::shared_ptr<const Grid> Grid::make(int n, int degree, double delta) {
  if (n < 1 || n > 6)
    throw Error(ErrorKind::DimensionMismatch, "grid: dimension must be between 1 and 6");
  if (degree < 4) throw Error(ErrorKind::Precondition, "grid: at least 4 nodes per axis");
  if (!(delta > 0.0)) throw Error(ErrorKind::Precondition, "grid: box edge must be positive");

  auto grid = std::shared_ptr<Grid>(new Grid());
  grid->n_ = n;
  grid->degree_ = degree;
  grid->delta_ = delta;

  std::size_t size = 1;
  for (int a = 0; a < n; ++a) {
    size *= static_cast<std::size_t>(degree);
    if (size > kMaxGridSize) throw Error(ErrorKind::Precondition, "grid: too many nodes");
  }
  grid->size_ = size;
  grid->strides_.assign(static_cast<std::size_t>(n), 1);
  for (int a = n - 2; a >= 0; --a) {
    grid->strides_[static_cast<std::size_t>(a)] =
        grid->strides_[static_cast<std::size_t>(a + 1)] * static_cast<std::size_t>(degree);
  }

  const int N = degree - 1;
  grid->nodes_.resize(static_cast<std::size_t>(degree));
  for (int j = 0; j < degree; ++j) {
    // ascending map of cos(j pi / N) onto [0, delta]; endpoints land exactly
    grid->nodes_[static_cast<std::size_t>(j)] =
        delta * 0.5 * (1.0 - std::cos(std::numbers::pi * j / N));
  }
  grid->nodes_.front() = 0.0;
  grid->nodes_.back() = delta;

  // d/du = -(2/delta) d/dx under u = delta (1 - x) / 2.
  Matrix dx = cheb_diff(degree);
  Matrix du(degree, degree);
  for (int i = 0; i < degree; ++i) {
    for (int j = 0; j < degree; ++j) du(i, j) = -(2.0 / delta) * dx(i, j);
  }
  grid->diff_ = std::move(du);
  grid->integ_ = cheb_integ(degree, delta);
  return grid;
}

std::vector<double> Grid::point(std::size_t flat) const {
  std::vector<double> u(static_cast<std::size_t>(n_));
  for (int a = 0; a < n_; ++a) u[static_cast<std::size_t>(a)] = nodes_[static_cast<std::size_t>(index_on_axis(flat, a))];
  return u;
}

bool Grid::interior(std::size_t flat, int margin) const {
  for (int a = 0; a < n_; ++a) {
    const int i = index_on_axis(flat, a);
    if (i < margin || i >= degree_ - margin) return false;
  }
  return true;
}

double GridFunction::max_abs() const {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::abs(v));
  return best;
}

GridFunction grid_sample(const std::shared_ptr<const Grid>& grid,
                         const std::function<double(std::span<const double>)>& f) {
  GridFunction out;
  out.grid = grid;
  out.values.assign(grid->size(), 0.0);
  parallel_for(grid->size(), [&](std::size_t flat) {
    const std::vector<double> u = grid->point(flat);
    const double v = f(std::span<const double>(u));
    out.values[flat] = v;
  });
  for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
    if (!std::isfinite(out.values[flat]))
      throw Error(ErrorKind::DomainViolation,
                  "grid_sample: non-finite value at node " + point_string(grid->point(flat)));
  }
  return out;
}

GridFunction grid_sample_axis(const std::shared_ptr<const Grid>& grid, const Expression& f,
                              int axis) {
  if (f.arity() != 1)
    throw Error(ErrorKind::ArityMismatch, "grid_sample_axis: expression must have one variable");
  if (axis < 0 || axis >= grid->dim())
    throw Error(ErrorKind::DimensionMismatch, "grid_sample_axis: axis out of range");
  return grid_sample(grid, [&](std::span<const double> u) {
    const double x = u[static_cast<std::size_t>(axis)];
    return f(std::span<const double>(&x, 1));
  });
}

GridFunction partial_derivative(const GridFunction& g, int axis) {
  require_axis(g, axis);
  return apply_axis_matrix(g, g.grid->diff_matrix(), axis);
}

GridFunction cumulative_integral(const GridFunction& g, int axis) {
  require_axis(g, axis);
  return apply_axis_matrix(g, g.grid->integ_matrix(), axis);
}

GridFunction restrict_axes_zero(const GridFunction& g, std::span<const int> axes) {
  for (int a : axes) require_axis(g, a);
  GridFunction out;
  out.grid = g.grid;
  out.values.assign(g.values.size(), 0.0);
  const Grid& grid = *g.grid;
  parallel_for(grid.size(), [&](std::size_t flat) {
    std::size_t pinned = flat;
    for (int a : axes) {
      pinned -= static_cast<std::size_t>(grid.index_on_axis(pinned, a)) * grid.stride(a);
    }
    out.values[flat] = g.values[pinned];
  });
  return out;
}

GridFunction gf_add(const GridFunction& a, const GridFunction& b) {
  GridFunction out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

GridFunction gf_sub(const GridFunction& a, const GridFunction& b) {
  GridFunction out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

GridFunction primitive_of_closed_form(std::span<const GridFunction> omega, const Expression* r) {
  if (omega.empty()) throw Error(ErrorKind::Precondition, "primitive_of_closed_form: empty form");
  const auto grid = omega[0].grid;
  const int n = grid->dim();
  if (static_cast<int>(omega.size()) != n - 1)
    throw Error(ErrorKind::DimensionMismatch,
                "primitive_of_closed_form: expected n-1 components");

  GridFunction v;
  v.grid = grid;
  v.values.assign(grid->size(), 0.0);
  std::vector<int> pinned;
  for (int k = 0; k < n - 1; ++k) {
    GridFunction component = restrict_axes_zero(omega[static_cast<std::size_t>(k)],
                                                std::span<const int>(pinned));
    v = gf_add(v, cumulative_integral(component, k));
    pinned.push_back(k);
  }
  if (r) v = gf_add(v, grid_sample_axis(grid, *r, n - 1));
  return v;
}

}  // namespace nijtoep
