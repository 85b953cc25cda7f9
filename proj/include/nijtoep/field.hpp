#pragma once

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "nijtoep/expression.hpp"
#include "nijtoep/linalg.hpp"
#include "nijtoep/toeplitz.hpp"

namespace nijtoep {

// Operator field in upper triangular Toeplitz form over coordinates u^1..u^n.
// Direct mode stores the coefficients g_i as expressions; Generated mode
// stores the functions f_1..f_{n-1} of (p, q) plus the diagonal generator
// f_n(x) and assembles L = f_1(P,Q) J^{n-1} + ... + f_{n-1}(P,Q) J + f_n(P).
// With include_f_n = false the diagonal is identically zero.
//
// Optional additive offsets (expressions in u^1..u^n, one per coefficient)
// perturb g; they exist so tests can break a generated field without leaving
// the Toeplitz class.
struct OperatorFieldSpec {
  struct Direct {
    std::vector<Expression> g;
  };
  struct Generated {
    std::vector<Expression> f;
    bool include_f_n = true;
  };

  int n = 0;
  std::variant<Direct, Generated> source;
  std::vector<Expression> offsets;  // empty, or exactly n expressions

  bool is_generated() const { return std::holds_alternative<Generated>(source); }
};

OperatorFieldSpec direct_field(std::vector<Expression> g);
OperatorFieldSpec generated_field(int n, std::vector<Expression> f, bool include_f_n = true);
OperatorFieldSpec with_offset(OperatorFieldSpec spec, int index, Expression delta);

// Names u1..un, the coordinate variable list for Direct fields and offsets.
std::vector<std::string> coordinate_names(int n);

// The constant field J as a Direct spec (handy for pushforward targets).
OperatorFieldSpec j_field_spec(int n);

template <typename S>
BasicToeplitz<S> eval_field(const OperatorFieldSpec& spec, std::span<const S> u) {
  if (static_cast<int>(u.size()) != spec.n)
    throw Error(ErrorKind::DimensionMismatch, "eval_field: point dimension mismatch");
  const int n = spec.n;
  BasicToeplitz<S> out;
  if (const auto* direct = std::get_if<OperatorFieldSpec::Direct>(&spec.source)) {
    out = toeplitz_zero(n, u[0]);
    for (int i = 0; i < n; ++i) out.g[static_cast<std::size_t>(i)] = direct->g[static_cast<std::size_t>(i)].eval(u);
  } else {
    const auto& gen = std::get<OperatorFieldSpec::Generated>(spec.source);
    auto [p, q] = build_pq(u);
    out = toeplitz_zero(n, u[0]);
    for (int i = 0; i + 1 < n; ++i) {
      BasicToeplitz<S> fi = matrix_function(gen.f[static_cast<std::size_t>(i)], p, &q);
      out = toeplitz_add(out, toeplitz_mul(fi, toeplitz_j_power(n, n - 1 - i, u[0])));
    }
    if (gen.include_f_n) out = toeplitz_add(out, matrix_function(gen.f[static_cast<std::size_t>(n - 1)], p));
  }
  if (!spec.offsets.empty()) {
    for (int i = 0; i < n; ++i)
      out.g[static_cast<std::size_t>(i)] = out.g[static_cast<std::size_t>(i)] + spec.offsets[static_cast<std::size_t>(i)].eval(u);
  }
  return out;
}

inline ToeplitzCoeffs eval_field(const OperatorFieldSpec& spec, std::span<const double> u) {
  return eval_field<double>(spec, u);
}

enum class JacobianMethod { Jet, FiniteDifference };

// Jacobi matrix of the coefficient system: entry (i, j) = dg_{i+1}/du^{j+1}.
// The jet method lifts one coordinate at a time to an order-2 series and runs
// the whole evaluation pipeline over it.
Matrix jacobian_g(const OperatorFieldSpec& spec, std::span<const double> u,
                  JacobianMethod method = JacobianMethod::Jet, double fd_step = 1e-5);

// Gradient of a scalar expression in u^1..u^n via jet lifts.
std::vector<double> gradient(const Expression& f, std::span<const double> u);

// Type (1,2) tensor: at(k, i, j) is the k-th component of T(d_i, d_j),
// all indices zero-based.
class Tensor12 {
 public:
  explicit Tensor12(int n) : n_(n), t_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }
  double& at(int k, int i, int j) { return t_[idx(k, i, j)]; }
  double at(int k, int i, int j) const { return t_[idx(k, i, j)]; }
  double max_abs() const;

 private:
  std::size_t idx(int k, int i, int j) const {
    return (static_cast<std::size_t>(k) * n_ + i) * n_ + j;
  }
  int n_;
  std::vector<double> t_;
};

// Torsions and brackets specialized to coordinate frames (commutators of the
// basis fields vanish). Core versions consume a precomputed value and Jacobi
// matrix so batch drivers can share them.
Tensor12 nijenhuis_from(const ToeplitzCoeffs& L, const Matrix& jac_g);
Tensor12 haantjes_from(const ToeplitzCoeffs& L, const Tensor12& nij);
Tensor12 bracket_from(const ToeplitzCoeffs& L, const Matrix& jac_gL,
                      const ToeplitzCoeffs& M, const Matrix& jac_gM);
std::pair<Tensor12, Tensor12> structure_tensors_from(int n, const Matrix& jac_g);

Tensor12 nijenhuis_torsion(const OperatorFieldSpec& spec, std::span<const double> u);
Tensor12 haantjes_torsion(const OperatorFieldSpec& spec, std::span<const double> u);
Tensor12 bracket(const OperatorFieldSpec& specL, const OperatorFieldSpec& specM,
                 std::span<const double> u);
std::pair<Tensor12, Tensor12> structure_tensors(const OperatorFieldSpec& spec,
                                                std::span<const double> u);

// 1 + max|L| + max|dg/du|, the scale used to normalize torsion magnitudes.
double field_scale(const ToeplitzCoeffs& L, const Matrix& jac_g);

// Normalized max-abs torsion of the field at u.
double torsion_norm(const OperatorFieldSpec& spec, std::span<const double> u);
double haantjes_norm(const OperatorFieldSpec& spec, std::span<const double> u);

}  // namespace nijtoep
