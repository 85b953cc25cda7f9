#pragma once

#include <optional>
#include <vector>

namespace nijtoep {

// Small dense row-major matrix. Dimensions here are tiny (operator fields up
// to n = 6, spectral transforms up to the per-axis degree), so everything is
// plain O(n^3) with partial pivoting.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {}

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  double max_abs() const;

  Matrix operator*(const Matrix& rhs) const;
  Matrix operator*(double scalar) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Matrix commutator(const Matrix& a, const Matrix& b);

// Gauss-Jordan with partial pivoting; nullopt when a pivot vanishes.
std::optional<Matrix> try_inverse(const Matrix& m, double pivot_tol = 1e-13);

double determinant(Matrix m);

}  // namespace nijtoep
