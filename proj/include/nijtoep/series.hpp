#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "nijtoep/errors.hpp"

namespace nijtoep {

// Constant terms smaller than this are treated as non-units: division, log and
// sqrt refuse them so genuine singularities are not papered over by rounding.
inline constexpr double kUnitThreshold = 1e-12;

template <typename S>
class Series;

// Every series scalar ring provides shape-preserving zero/constant embedding
// and access to its innermost constant part (used for domain guards). double
// is the base ring; Series<S> nests, which is how first-derivative jets flow
// through the Toeplitz decomposition without symbolic bookkeeping.
template <typename S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double zero_like(double) { return 0.0; }
  static double constant_like(double, double v) { return v; }
  static double leading(double x) { return x; }
};

inline double powi(double x, int k) {
  if (k < 0) throw Error(ErrorKind::DomainViolation, "powi: negative exponent");
  double acc = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  return acc;
}

// Truncated power series in one formal variable t, kept to a fixed order:
// coeff(k) multiplies t^k and there are exactly order() coefficients.
template <typename S>
class Series {
 public:
  Series(int order, const S& zero) : c_(check_order(order), zero) {}

  static Series from_coeffs(std::vector<S> coeffs) {
    check_order(static_cast<int>(coeffs.size()));
    Series s(std::move(coeffs));
    return s;
  }

  static Series constant(int order, const S& value) {
    Series s(order, ScalarTraits<S>::zero_like(value));
    s.c_[0] = value;
    return s;
  }

  // value + t, the dual-number lift used for derivative extraction.
  static Series variable(int order, const S& value) {
    Series s = constant(order, value);
    if (order >= 2) s.c_[1] = ScalarTraits<S>::constant_like(value, 1.0);
    return s;
  }

  int order() const { return static_cast<int>(c_.size()); }
  const S& coeff(int k) const { return c_[static_cast<std::size_t>(k)]; }
  S& coeff(int k) { return c_[static_cast<std::size_t>(k)]; }
  const std::vector<S>& coeffs() const { return c_; }

 private:
  explicit Series(std::vector<S> coeffs) : c_(std::move(coeffs)) {}

  static int check_order(int order) {
    if (order < 1) throw Error(ErrorKind::OrderMismatch, "series order must be positive");
    return order;
  }

  std::vector<S> c_;
};

template <typename S>
struct ScalarTraits<Series<S>> {
  static Series<S> zero_like(const Series<S>& x) {
    return Series<S>(x.order(), ScalarTraits<S>::zero_like(x.coeff(0)));
  }
  static Series<S> constant_like(const Series<S>& x, double v) {
    return Series<S>::constant(x.order(), ScalarTraits<S>::constant_like(x.coeff(0), v));
  }
  static double leading(const Series<S>& x) { return ScalarTraits<S>::leading(x.coeff(0)); }
};

using TruncatedSeries = Series<double>;

namespace detail {
template <typename S>
inline void require_same_order(const Series<S>& a, const Series<S>& b) {
  if (a.order() != b.order())
    throw Error(ErrorKind::OrderMismatch, "series operands have different orders");
}
}  // namespace detail

template <typename S>
Series<S> operator+(const Series<S>& a, const Series<S>& b) {
  detail::require_same_order(a, b);
  Series<S> out = a;
  for (int k = 0; k < out.order(); ++k) out.coeff(k) = out.coeff(k) + b.coeff(k);
  return out;
}

template <typename S>
Series<S> operator-(const Series<S>& a, const Series<S>& b) {
  detail::require_same_order(a, b);
  Series<S> out = a;
  for (int k = 0; k < out.order(); ++k) out.coeff(k) = out.coeff(k) - b.coeff(k);
  return out;
}

template <typename S>
Series<S> operator-(const Series<S>& a) {
  Series<S> out = a;
  for (int k = 0; k < out.order(); ++k) out.coeff(k) = -out.coeff(k);
  return out;
}

template <typename S>
Series<S> operator*(const Series<S>& a, const Series<S>& b) {
  detail::require_same_order(a, b);
  const int n = a.order();
  Series<S> out = ScalarTraits<Series<S>>::zero_like(a);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      out.coeff(i + j) = out.coeff(i + j) + a.coeff(i) * b.coeff(j);
    }
  }
  return out;
}

template <typename S>
Series<S> operator*(const Series<S>& a, double v) {
  Series<S> out = a;
  for (int k = 0; k < out.order(); ++k) out.coeff(k) = out.coeff(k) * v;
  return out;
}

template <typename S>
Series<S> operator*(double v, const Series<S>& a) {
  return a * v;
}

// Long division; requires a unit constant term in the divisor.
template <typename S>
Series<S> operator/(const Series<S>& a, const Series<S>& b) {
  detail::require_same_order(a, b);
  if (std::abs(ScalarTraits<Series<S>>::leading(b)) <= kUnitThreshold)
    throw Error(ErrorKind::NonUnitDivisor, "series division: constant term of divisor is below the unit threshold");
  const int n = a.order();
  Series<S> out = ScalarTraits<Series<S>>::zero_like(a);
  for (int k = 0; k < n; ++k) {
    S acc = a.coeff(k);
    for (int j = 1; j <= k; ++j) acc = acc - b.coeff(j) * out.coeff(k - j);
    out.coeff(k) = acc / b.coeff(0);
  }
  return out;
}

template <typename S>
Series<S> powi(const Series<S>& a, int k) {
  if (k < 0) throw Error(ErrorKind::DomainViolation, "powi: negative exponent");
  Series<S> acc = ScalarTraits<Series<S>>::constant_like(a, 1.0);
  Series<S> base = a;
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  return acc;
}

enum class AnalyticFn { Exp, Log, Sin, Cos, Sqrt };

// func(a) by splitting a = c0 + abar and composing the Taylor expansion of
// func at c0 with abar. Since abar has no constant term the composition
// terminates at the truncation order.
template <typename S>
Series<S> apply_analytic(AnalyticFn fn, const Series<S>& a) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;

  const int n = a.order();
  const S& c0 = a.coeff(0);
  const double head = ScalarTraits<S>::leading(c0);

  std::vector<S> taylor;  // taylor[k] = func^(k)(c0) / k!
  taylor.reserve(static_cast<std::size_t>(n));
  switch (fn) {
    case AnalyticFn::Exp: {
      taylor.push_back(exp(c0));
      for (int k = 1; k < n; ++k) taylor.push_back(taylor[static_cast<std::size_t>(k - 1)] * (1.0 / k));
      break;
    }
    case AnalyticFn::Log: {
      if (head <= kUnitThreshold)
        throw Error(ErrorKind::DomainViolation, "log: constant term must be positive");
      taylor.push_back(log(c0));
      if (n > 1) taylor.push_back(ScalarTraits<S>::constant_like(c0, 1.0) / c0);
      for (int k = 2; k < n; ++k) {
        taylor.push_back(taylor[static_cast<std::size_t>(k - 1)] * (-static_cast<double>(k - 1) / k) / c0);
      }
      break;
    }
    case AnalyticFn::Sin:
    case AnalyticFn::Cos: {
      const S s = sin(c0);
      const S c = cos(c0);
      const S cycle[4] = {s, c, -s, -c};
      const int shift = fn == AnalyticFn::Sin ? 0 : 1;
      double inv_fact = 1.0;
      for (int k = 0; k < n; ++k) {
        if (k > 0) inv_fact /= k;
        taylor.push_back(cycle[(k + shift) % 4] * inv_fact);
      }
      break;
    }
    case AnalyticFn::Sqrt: {
      if (head <= kUnitThreshold)
        throw Error(ErrorKind::DomainViolation, "sqrt: constant term must be positive");
      taylor.push_back(sqrt(c0));
      for (int k = 1; k < n; ++k) {
        taylor.push_back(taylor[static_cast<std::size_t>(k - 1)] * ((1.5 - k) / k) / c0);
      }
      break;
    }
  }

  Series<S> abar = a;
  abar.coeff(0) = ScalarTraits<S>::zero_like(c0);
  Series<S> out = Series<S>::constant(n, taylor[static_cast<std::size_t>(n - 1)]);
  for (int k = n - 2; k >= 0; --k) {
    out = out * abar;
    out.coeff(0) = out.coeff(0) + taylor[static_cast<std::size_t>(k)];
  }
  return out;
}

template <typename S>
Series<S> exp(const Series<S>& a) { return apply_analytic(AnalyticFn::Exp, a); }
template <typename S>
Series<S> log(const Series<S>& a) { return apply_analytic(AnalyticFn::Log, a); }
template <typename S>
Series<S> sin(const Series<S>& a) { return apply_analytic(AnalyticFn::Sin, a); }
template <typename S>
Series<S> cos(const Series<S>& a) { return apply_analytic(AnalyticFn::Cos, a); }
template <typename S>
Series<S> sqrt(const Series<S>& a) { return apply_analytic(AnalyticFn::Sqrt, a); }

inline TruncatedSeries make_series(std::vector<double> coeffs) {
  return TruncatedSeries::from_coeffs(std::move(coeffs));
}

}  // namespace nijtoep
