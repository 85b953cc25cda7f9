#include "nijtoep/field.hpp"

#include <cmath>
#include <string>

namespace nijtoep {

std::vector<std::string> coordinate_names(int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) names.push_back("u" + std::to_string(i));
  return names;
}

OperatorFieldSpec direct_field(std::vector<Expression> g) {
  if (g.empty()) throw Error(ErrorKind::DimensionMismatch, "direct_field: no coefficients");
  OperatorFieldSpec spec;
  spec.n = static_cast<int>(g.size());
  for (const Expression& e : g) {
    if (e.arity() != spec.n)
      throw Error(ErrorKind::ArityMismatch, "direct_field: coefficient arity must equal the dimension");
  }
  spec.source = OperatorFieldSpec::Direct{std::move(g)};
  return spec;
}

OperatorFieldSpec generated_field(int n, std::vector<Expression> f, bool include_f_n) {
  if (n < 2) throw Error(ErrorKind::DimensionMismatch, "generated_field: dimension must be at least 2");
  const std::size_t wanted = include_f_n ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n - 1);
  if (f.size() != wanted && !(f.size() == static_cast<std::size_t>(n) && !include_f_n))
    throw Error(ErrorKind::ArityMismatch, "generated_field: wrong number of generator functions");
  for (int i = 0; i + 1 < n; ++i) {
    if (f[static_cast<std::size_t>(i)].arity() != 2)
      throw Error(ErrorKind::ArityMismatch,
                  "generated_field: f_" + std::to_string(i + 1) + " must have two variables (p, q)");
  }
  if (include_f_n && f[static_cast<std::size_t>(n - 1)].arity() != 1)
    throw Error(ErrorKind::ArityMismatch, "generated_field: f_n must have a single variable (x)");
  OperatorFieldSpec spec;
  spec.n = n;
  spec.source = OperatorFieldSpec::Generated{std::move(f), include_f_n};
  return spec;
}

OperatorFieldSpec with_offset(OperatorFieldSpec spec, int index, Expression delta) {
  if (index < 1 || index > spec.n)
    throw Error(ErrorKind::DimensionMismatch, "with_offset: coefficient index out of range");
  if (delta.arity() != spec.n)
    throw Error(ErrorKind::ArityMismatch, "with_offset: offset arity must equal the dimension");
  if (spec.offsets.empty()) {
    const auto names = coordinate_names(spec.n);
    spec.offsets.reserve(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) spec.offsets.push_back(Expression::parse("0", names));
  }
  spec.offsets[static_cast<std::size_t>(index - 1)] = std::move(delta);
  return spec;
}

OperatorFieldSpec j_field_spec(int n) {
  const auto names = coordinate_names(n);
  std::vector<Expression> g;
  g.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) g.push_back(Expression::parse(i == n - 1 ? "1" : "0", names));
  return direct_field(std::move(g));
}

Matrix jacobian_g(const OperatorFieldSpec& spec, std::span<const double> u,
                  JacobianMethod method, double fd_step) {
  const int n = spec.n;
  Matrix jac(n, n);
  if (method == JacobianMethod::Jet) {
    std::vector<Series<double>> lifted;
    lifted.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      lifted.clear();
      for (int k = 0; k < n; ++k) {
        lifted.push_back(k == j ? Series<double>::variable(2, u[static_cast<std::size_t>(k)])
                                : Series<double>::constant(2, u[static_cast<std::size_t>(k)]));
      }
      BasicToeplitz<Series<double>> value =
          eval_field<Series<double>>(spec, std::span<const Series<double>>(lifted));
      for (int i = 0; i < n; ++i) jac(i, j) = value.g[static_cast<std::size_t>(i)].coeff(1);
    }
  } else {
    std::vector<double> shifted(u.begin(), u.end());
    for (int j = 0; j < n; ++j) {
      const double saved = shifted[static_cast<std::size_t>(j)];
      shifted[static_cast<std::size_t>(j)] = saved + fd_step;
      ToeplitzCoeffs plus = eval_field(spec, std::span<const double>(shifted));
      shifted[static_cast<std::size_t>(j)] = saved - fd_step;
      ToeplitzCoeffs minus = eval_field(spec, std::span<const double>(shifted));
      shifted[static_cast<std::size_t>(j)] = saved;
      for (int i = 0; i < n; ++i)
        jac(i, j) = (plus.g[static_cast<std::size_t>(i)] - minus.g[static_cast<std::size_t>(i)]) / (2.0 * fd_step);
    }
  }
  return jac;
}

std::vector<double> gradient(const Expression& f, std::span<const double> u) {
  const int n = static_cast<int>(u.size());
  std::vector<double> grad(static_cast<std::size_t>(n), 0.0);
  std::vector<Series<double>> lifted;
  lifted.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    lifted.clear();
    for (int k = 0; k < n; ++k) {
      lifted.push_back(k == j ? Series<double>::variable(2, u[static_cast<std::size_t>(k)])
                              : Series<double>::constant(2, u[static_cast<std::size_t>(k)]));
    }
    grad[static_cast<std::size_t>(j)] =
        f.eval<Series<double>>(std::span<const Series<double>>(lifted)).coeff(1);
  }
  return grad;
}

double Tensor12::max_abs() const {
  double best = 0.0;
  for (double v : t_) best = std::max(best, std::abs(v));
  return best;
}

namespace {

// dL/du^m as a dense matrix; the Toeplitz structure maps coefficient
// derivatives onto the bands.
std::vector<Matrix> band_derivatives(int n, const Matrix& jac_g) {
  std::vector<Matrix> d(static_cast<std::size_t>(n), Matrix(n, n));
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        d[static_cast<std::size_t>(m)](i, j) = jac_g(n - 1 - (j - i), m);
      }
    }
  }
  return d;
}

}  // namespace

Tensor12 nijenhuis_from(const ToeplitzCoeffs& Lc, const Matrix& jac_g) {
  const int n = Lc.dim();
  const Matrix L = to_dense(Lc);
  const std::vector<Matrix> dL = band_derivatives(n, jac_g);
  Tensor12 N(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a) {
          acc += L(a, i) * dL[static_cast<std::size_t>(a)](k, j) -
                 L(a, j) * dL[static_cast<std::size_t>(a)](k, i) +
                 L(k, a) * (dL[static_cast<std::size_t>(j)](a, i) - dL[static_cast<std::size_t>(i)](a, j));
        }
        N.at(k, i, j) = acc;
      }
    }
  }
  return N;
}

Tensor12 haantjes_from(const ToeplitzCoeffs& Lc, const Tensor12& N) {
  const int n = Lc.dim();
  const Matrix L = to_dense(Lc);
  const Matrix L2 = L * L;
  Tensor12 H(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int m = 0; m < n; ++m) acc += L2(k, m) * N.at(m, i, j);
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) acc += N.at(k, a, b) * L(a, i) * L(b, j);
        }
        for (int m = 0; m < n; ++m) {
          for (int a = 0; a < n; ++a) {
            acc -= L(k, m) * (N.at(m, a, j) * L(a, i) + N.at(m, i, a) * L(a, j));
          }
        }
        H.at(k, i, j) = acc;
      }
    }
  }
  return H;
}

Tensor12 bracket_from(const ToeplitzCoeffs& Lc, const Matrix& jac_gL,
                      const ToeplitzCoeffs& Mc, const Matrix& jac_gM) {
  const int n = Lc.dim();
  const Matrix L = to_dense(Lc);
  const Matrix M = to_dense(Mc);
  const std::vector<Matrix> dL = band_derivatives(n, jac_gL);
  const std::vector<Matrix> dM = band_derivatives(n, jac_gM);
  Tensor12 B(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a) {
          acc += L(a, i) * dM[static_cast<std::size_t>(a)](k, j) -
                 M(a, j) * dL[static_cast<std::size_t>(a)](k, i) -
                 L(k, a) * dM[static_cast<std::size_t>(i)](a, j) +
                 M(k, a) * dL[static_cast<std::size_t>(j)](a, i);
        }
        B.at(k, i, j) = acc;
      }
    }
  }
  return B;
}

std::pair<Tensor12, Tensor12> structure_tensors_from(int n, const Matrix& jac_g) {
  // Dense powers of J: J^s has ones at (i, i+s).
  std::vector<Matrix> jpow(static_cast<std::size_t>(n), Matrix(n, n));
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i + s < n; ++i) jpow[static_cast<std::size_t>(s)](i, i + s) = 1.0;
  }
  // (J* dg_m)_i = dg_m(i-1); a zero-padded shift of the Jacobian row.
  auto jstar_row = [&](int m, int i) { return i >= 1 ? jac_g(m, i - 1) : 0.0; };

  Tensor12 T(n);
  Tensor12 M(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double t_acc = 0.0;
        double m_acc = 0.0;
        for (int m = 0; m < n; ++m) {
          const Matrix& jp = jpow[static_cast<std::size_t>(n - 1 - m)];
          t_acc += jac_g(m, i) * jp(k, j) + jac_g(m, j) * jp(k, i);
          m_acc += jstar_row(m, i) * jp(k, j) - jstar_row(m, j) * jp(k, i);
        }
        for (int m = 1; m < n; ++m) {
          const Matrix& jp1 = jpow[static_cast<std::size_t>(n - m)];
          m_acc += jac_g(m, j) * jp1(k, i) - jac_g(m, i) * jp1(k, j);
        }
        T.at(k, i, j) = t_acc;
        M.at(k, i, j) = m_acc;
      }
    }
  }
  return {std::move(T), std::move(M)};
}

Tensor12 nijenhuis_torsion(const OperatorFieldSpec& spec, std::span<const double> u) {
  return nijenhuis_from(eval_field(spec, u), jacobian_g(spec, u));
}

Tensor12 haantjes_torsion(const OperatorFieldSpec& spec, std::span<const double> u) {
  const ToeplitzCoeffs L = eval_field(spec, u);
  return haantjes_from(L, nijenhuis_from(L, jacobian_g(spec, u)));
}

Tensor12 bracket(const OperatorFieldSpec& specL, const OperatorFieldSpec& specM,
                 std::span<const double> u) {
  if (specL.n != specM.n) throw Error(ErrorKind::DimensionMismatch, "bracket: dimension mismatch");
  return bracket_from(eval_field(specL, u), jacobian_g(specL, u), eval_field(specM, u),
                      jacobian_g(specM, u));
}

std::pair<Tensor12, Tensor12> structure_tensors(const OperatorFieldSpec& spec,
                                                std::span<const double> u) {
  return structure_tensors_from(spec.n, jacobian_g(spec, u));
}

double field_scale(const ToeplitzCoeffs& L, const Matrix& jac_g) {
  double lmax = 0.0;
  for (double v : L.g) lmax = std::max(lmax, std::abs(v));
  return 1.0 + lmax + jac_g.max_abs();
}

double torsion_norm(const OperatorFieldSpec& spec, std::span<const double> u) {
  const ToeplitzCoeffs L = eval_field(spec, u);
  const Matrix jac = jacobian_g(spec, u);
  return nijenhuis_from(L, jac).max_abs() / field_scale(L, jac);
}

double haantjes_norm(const OperatorFieldSpec& spec, std::span<const double> u) {
  const ToeplitzCoeffs L = eval_field(spec, u);
  const Matrix jac = jacobian_g(spec, u);
  return haantjes_from(L, nijenhuis_from(L, jac)).max_abs() / field_scale(L, jac);
}

}  // namespace nijtoep
