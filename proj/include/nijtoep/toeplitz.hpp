#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nijtoep/errors.hpp"
#include "nijtoep/expression.hpp"
#include "nijtoep/linalg.hpp"
#include "nijtoep/series.hpp"

namespace nijtoep {

// Default numeric margin for the regularity condition g_{n-1} != 0.
inline constexpr double kRegularityThreshold = 1e-6;

// Upper triangular Toeplitz matrix stored as the coefficient vector
// (g_1, ..., g_n): g_n sits on the diagonal, g_1 in the top-right corner, and
// the dense entry (i, j) equals g_{n-(j-i)} for j >= i. Equivalently the
// matrix is g_1 J^{n-1} + ... + g_n Id.
template <typename S>
struct BasicToeplitz {
  std::vector<S> g;

  int dim() const { return static_cast<int>(g.size()); }

  // g_i with the paper's 1-based index.
  const S& gi(int i) const { return g[static_cast<std::size_t>(i - 1)]; }
  S& gi(int i) { return g[static_cast<std::size_t>(i - 1)]; }
};

using ToeplitzCoeffs = BasicToeplitz<double>;

namespace detail {
template <typename S>
void require_same_dim(const BasicToeplitz<S>& a, const BasicToeplitz<S>& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorKind::DimensionMismatch, "Toeplitz operands have different dimension");
}
}  // namespace detail

template <typename S>
BasicToeplitz<S> toeplitz_zero(int n, const S& proto) {
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "Toeplitz dimension must be positive");
  BasicToeplitz<S> t;
  t.g.assign(static_cast<std::size_t>(n), ScalarTraits<S>::zero_like(proto));
  return t;
}

template <typename S>
BasicToeplitz<S> toeplitz_identity(int n, const S& proto) {
  BasicToeplitz<S> t = toeplitz_zero(n, proto);
  t.g.back() = ScalarTraits<S>::constant_like(proto, 1.0);
  return t;
}

// J^k: the coefficient of J^{n-i} is g_i, so J^k has g_{n-k} = 1.
template <typename S>
BasicToeplitz<S> toeplitz_j_power(int n, int k, const S& proto) {
  BasicToeplitz<S> t = toeplitz_zero(n, proto);
  if (k < 0) throw Error(ErrorKind::DimensionMismatch, "negative power of J");
  if (k < n) t.gi(n - k) = ScalarTraits<S>::constant_like(proto, 1.0);
  return t;
}

template <typename S>
BasicToeplitz<S> toeplitz_j(int n, const S& proto) {
  return toeplitz_j_power(n, 1, proto);
}

inline ToeplitzCoeffs toeplitz_zero(int n) { return toeplitz_zero(n, 0.0); }
inline ToeplitzCoeffs toeplitz_identity(int n) { return toeplitz_identity(n, 0.0); }
inline ToeplitzCoeffs toeplitz_j(int n) { return toeplitz_j(n, 0.0); }
inline ToeplitzCoeffs toeplitz_j_power(int n, int k) { return toeplitz_j_power(n, k, 0.0); }

template <typename S>
BasicToeplitz<S> toeplitz_add(const BasicToeplitz<S>& a, const BasicToeplitz<S>& b) {
  detail::require_same_dim(a, b);
  BasicToeplitz<S> out = a;
  for (std::size_t i = 0; i < out.g.size(); ++i) out.g[i] = out.g[i] + b.g[i];
  return out;
}

template <typename S>
BasicToeplitz<S> toeplitz_sub(const BasicToeplitz<S>& a, const BasicToeplitz<S>& b) {
  detail::require_same_dim(a, b);
  BasicToeplitz<S> out = a;
  for (std::size_t i = 0; i < out.g.size(); ++i) out.g[i] = out.g[i] - b.g[i];
  return out;
}

// Product of two upper triangular Toeplitz matrices. Under the isomorphism
// with R[t]/(t^n) (coefficient of t^s is g_{n-s}) this is the truncated
// series product, so equal-size Toeplitz matrices always commute. The
// convolution accumulates symmetric pairs so the commutativity is bitwise.
template <typename S>
BasicToeplitz<S> toeplitz_mul(const BasicToeplitz<S>& a, const BasicToeplitz<S>& b) {
  detail::require_same_dim(a, b);
  const int n = a.dim();
  auto at = [n](const BasicToeplitz<S>& t, int k) -> const S& {
    return t.g[static_cast<std::size_t>(n - 1 - k)];
  };
  BasicToeplitz<S> out = toeplitz_zero(n, a.g[0]);
  for (int s = 0; s < n; ++s) {
    S acc = ScalarTraits<S>::zero_like(a.g[0]);
    for (int r = 0; 2 * r <= s; ++r) {
      const int r2 = s - r;
      if (r == r2) {
        acc = acc + at(a, r) * at(b, r);
      } else {
        acc = acc + (at(a, r) * at(b, r2) + at(a, r2) * at(b, r));
      }
    }
    out.g[static_cast<std::size_t>(n - 1 - s)] = acc;
  }
  return out;
}

template <typename S>
Series<S> toeplitz_to_series(const BasicToeplitz<S>& t) {
  const int n = t.dim();
  Series<S> s(n, ScalarTraits<S>::zero_like(t.g[0]));
  for (int k = 0; k < n; ++k) s.coeff(k) = t.g[static_cast<std::size_t>(n - 1 - k)];
  return s;
}

template <typename S>
BasicToeplitz<S> series_to_toeplitz(const Series<S>& s) {
  const int n = s.order();
  BasicToeplitz<S> t = toeplitz_zero(n, s.coeff(0));
  for (int k = 0; k < n; ++k) t.g[static_cast<std::size_t>(n - 1 - k)] = s.coeff(k);
  return t;
}

// P = u^1 J^{n-1} + ... + u^n Id and Q = (n-1) u^1 J^{n-2} + ... + u^{n-1} Id,
// i.e. the Toeplitz pair whose symbol polynomials are p(t) and p'(t).
template <typename S>
std::pair<BasicToeplitz<S>, BasicToeplitz<S>> build_pq(std::span<const S> u) {
  const int n = static_cast<int>(u.size());
  if (n < 1) throw Error(ErrorKind::DimensionMismatch, "build_pq: empty point");
  BasicToeplitz<S> p;
  p.g.assign(u.begin(), u.end());
  BasicToeplitz<S> q = toeplitz_zero(n, u[0]);
  for (int i = 1; i < n; ++i) {
    q.g[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i - 1)] * static_cast<double>(n - i);
  }
  return {std::move(p), std::move(q)};
}

inline std::pair<ToeplitzCoeffs, ToeplitzCoeffs> build_pq(std::span<const double> u) {
  return build_pq<double>(u);
}

// f(P, Q) via the truncated decomposition of f(p(t), q(t)): bind the symbol
// series of P and Q, evaluate f over the series ring, and read the output
// coefficients back in Toeplitz order. Pass q = nullptr for a function of a
// single variable f(P).
template <typename S>
BasicToeplitz<S> matrix_function(const Expression& f, const BasicToeplitz<S>& p,
                                 const BasicToeplitz<S>* q = nullptr) {
  const int wanted = q ? 2 : 1;
  if (f.arity() != wanted)
    throw Error(ErrorKind::ArityMismatch,
                "matrix_function: expression arity does not match the operand count");
  if (q) detail::require_same_dim(p, *q);
  std::vector<Series<S>> bind;
  bind.reserve(2);
  bind.push_back(toeplitz_to_series(p));
  if (q) bind.push_back(toeplitz_to_series(*q));
  Series<S> value = f.eval<Series<S>>(std::span<const Series<S>>(bind));
  return series_to_toeplitz(value);
}

inline Matrix to_dense(const ToeplitzCoeffs& t) {
  const int n = t.dim();
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) m(i, j) = t.gi(n - (j - i));
  }
  return m;
}

struct GlRegularity {
  bool regular = false;
  double witness = 0.0;  // the value of g_{n-1}
};

inline GlRegularity gl_regularity(const ToeplitzCoeffs& t, double threshold = kRegularityThreshold) {
  if (t.dim() < 2) return {true, 0.0};
  GlRegularity r;
  r.witness = t.gi(t.dim() - 1);
  r.regular = std::abs(r.witness) > threshold;
  return r;
}

}  // namespace nijtoep
