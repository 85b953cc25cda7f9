#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nijtoep/expression.hpp"
#include "nijtoep/linalg.hpp"

namespace nijtoep {

// Tensor-product Chebyshev-Gauss-Lobatto grid over the box [0, delta]^n.
// Per-axis nodes are shared; the one-dimensional spectral differentiation and
// cumulative-integration (from 0) matrices are precomputed once. Values are
// stored row-major with axis 0 slowest.
class Grid {
 public:
  static std::shared_ptr<const Grid> make(int n, int degree, double delta);

  int dim() const { return n_; }
  int degree() const { return degree_; }
  double delta() const { return delta_; }
  const std::vector<double>& nodes() const { return nodes_; }

  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  int index_on_axis(std::size_t flat, int axis) const {
    return static_cast<int>((flat / stride(axis)) % static_cast<std::size_t>(degree_));
  }
  std::vector<double> point(std::size_t flat) const;

  // True when every axis index lies at least `margin` nodes away from both
  // boundaries, where spectral differentiation is least accurate.
  bool interior(std::size_t flat, int margin = 2) const;

  const Matrix& diff_matrix() const { return diff_; }
  const Matrix& integ_matrix() const { return integ_; }

 private:
  Grid() = default;

  int n_ = 0;
  int degree_ = 0;
  double delta_ = 0.0;
  std::size_t size_ = 0;
  std::vector<double> nodes_;
  std::vector<std::size_t> strides_;
  Matrix diff_;
  Matrix integ_;
};

// Scalar field sampled on a grid.
struct GridFunction {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;

  double max_abs() const;
};

GridFunction grid_sample(const std::shared_ptr<const Grid>& grid,
                         const std::function<double(std::span<const double>)>& f);

// Samples an arity-1 expression of the coordinate along one axis.
GridFunction grid_sample_axis(const std::shared_ptr<const Grid>& grid, const Expression& f,
                              int axis);

GridFunction partial_derivative(const GridFunction& g, int axis);
GridFunction cumulative_integral(const GridFunction& g, int axis);

// Pins the listed axes to their node 0 (the coordinate origin) and broadcasts
// the slice back over the full grid.
GridFunction restrict_axes_zero(const GridFunction& g, std::span<const int> axes);

GridFunction gf_add(const GridFunction& a, const GridFunction& b);
GridFunction gf_sub(const GridFunction& a, const GridFunction& b);

// v(u) = int_0^{u^1} w_1(t, u^2, ..) dt + int_0^{u^2} w_2(0, t, u^3, ..) dt
//      + ... + int_0^{u^{n-1}} w_{n-1}(0, .., t, u^n) dt + r(u^n).
// Recovers the primitive of the closed 1-form w = w_1 du^1 + .. + w_{n-1} du^{n-1}.
GridFunction primitive_of_closed_form(std::span<const GridFunction> omega, const Expression* r);

}  // namespace nijtoep
