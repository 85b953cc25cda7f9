#include "nijtoep/transform.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nijtoep/parallel.hpp"

namespace nijtoep {

namespace {

std::string node_string(const Grid& grid, std::size_t flat) {
  std::string s = "(";
  const std::vector<double> u = grid.point(flat);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(u[i]);
  }
  return s + ")";
}

// m_{n-(j-a)} for the dense pullback entry M^a_j, both indices 1-based.
double m_entry(const FieldOnGrid& m, std::size_t flat, int a, int j) {
  const int n = m.dim();
  if (j < a) return 0.0;
  return m.coeff[static_cast<std::size_t>(n - (j - a) - 1)].values[flat];
}

std::vector<std::vector<GridFunction>> all_partials(std::span<const GridFunction> fns) {
  const int n = fns[0].grid->dim();
  std::vector<std::vector<GridFunction>> d(fns.size());
  for (std::size_t i = 0; i < fns.size(); ++i) {
    d[i].reserve(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) d[i].push_back(partial_derivative(fns[i], a));
  }
  return d;
}

void require_interior(const Grid& grid, int margin) {
  if (grid.degree() < 2 * margin + 1)
    throw Error(ErrorKind::Precondition,
                "grid degree " + std::to_string(grid.degree()) +
                    " leaves no interior nodes at margin " + std::to_string(margin));
}

}  // namespace

FieldOnGrid eval_field_on_grid(const OperatorFieldSpec& spec,
                               const std::shared_ptr<const Grid>& grid) {
  if (spec.n != grid->dim())
    throw Error(ErrorKind::DimensionMismatch, "eval_field_on_grid: dimension mismatch");
  const int n = spec.n;
  FieldOnGrid out;
  out.coeff.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.coeff[static_cast<std::size_t>(i)].grid = grid;
    out.coeff[static_cast<std::size_t>(i)].values.assign(grid->size(), 0.0);
  }
  parallel_for(grid->size(), [&](std::size_t flat) {
    const std::vector<double> u = grid->point(flat);
    const ToeplitzCoeffs value = eval_field(spec, std::span<const double>(u));
    for (int i = 0; i < n; ++i)
      out.coeff[static_cast<std::size_t>(i)].values[flat] = value.g[static_cast<std::size_t>(i)];
  });
  return out;
}

OmegaSolve solve_omega(const FieldOnGrid& m, std::span<const GridFunction> dv,
                       const TransformOptions& options) {
  const int n = m.dim();
  if (static_cast<int>(dv.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "solve_omega: expected n differential components");
  const auto grid = dv[0].grid;
  const GridFunction& m_reg = m.coeff[static_cast<std::size_t>(n - 2)];

  double dv_scale = 0.0;
  for (const GridFunction& c : dv) dv_scale = std::max(dv_scale, c.max_abs());

  OmegaSolve out;
  out.omega.resize(static_cast<std::size_t>(n - 1));
  for (auto& w : out.omega) {
    w.grid = grid;
    w.values.assign(grid->size(), 0.0);
  }

  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    if (std::abs(m_reg.values[flat]) < options.m_lower_bound)
      throw Error(ErrorKind::RegularityViolation,
                  "solve_omega: m_{n-1} vanishes at node " + node_string(*grid, flat));
  }

  const double consistency_raw = dv[0].max_abs();
  out.consistency = consistency_raw / (1.0 + dv_scale);
  if (out.consistency > options.consistency_tolerance)
    throw Error(ErrorKind::InconsistentSystem,
                "solve_omega: first differential component is not zero (residual " +
                    std::to_string(out.consistency) + ")");

  parallel_for(grid->size(), [&](std::size_t flat) {
    const double lead = m_reg.values[flat];
    for (int j = 2; j <= n; ++j) {
      double acc = dv[static_cast<std::size_t>(j - 1)].values[flat];
      for (int i = 1; i <= j - 2; ++i) {
        acc -= out.omega[static_cast<std::size_t>(i - 1)].values[flat] * m_entry(m, flat, i, j);
      }
      out.omega[static_cast<std::size_t>(j - 2)].values[flat] = acc / lead;
    }
  });
  return out;
}

SysReport verify_sys(std::span<const GridFunction> v, const FieldOnGrid& m,
                     const TransformOptions& options) {
  const int n = m.dim();
  if (static_cast<int>(v.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "verify_sys: expected n functions");
  const auto grid = v[0].grid;
  require_interior(*grid, options.interior_margin);
  const auto dv = all_partials(v);

  SysReport report;
  report.min_dv1_du1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) {
    double raw = 0.0;
    double scale = 0.0;
    for (std::size_t flat = 0; flat < grid->size(); ++flat) {
      if (!grid->interior(flat, options.interior_margin)) continue;
      for (int j = 1; j <= n; ++j) {
        double lhs = 0.0;
        for (int a = 1; a <= j; ++a) {
          lhs += dv[static_cast<std::size_t>(i)][static_cast<std::size_t>(a - 1)].values[flat] *
                 m_entry(m, flat, a, j);
        }
        const double rhs =
            dv[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j - 1)].values[flat];
        raw = std::max(raw, std::abs(lhs - rhs));
        scale = std::max(scale, std::max(std::abs(lhs), std::abs(rhs)));
      }
    }
    report.raw.push_back(raw);
    report.residuals.push_back(raw / (1.0 + scale));
  }
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    if (!grid->interior(flat, options.interior_margin)) continue;
    report.min_dv1_du1 = std::min(report.min_dv1_du1, std::abs(dv[0][0].values[flat]));
  }
  return report;
}

SysReport verify_sys(std::span<const GridFunction> v, const OperatorFieldSpec& m_spec,
                     const TransformOptions& options) {
  return verify_sys(v, eval_field_on_grid(m_spec, v[0].grid), options);
}

TransformResult run_algorithm(const OperatorFieldSpec& m_spec, const Expression& q,
                              std::span<const Expression> r,
                              const std::shared_ptr<const Grid>& grid,
                              const TransformOptions& options) {
  const int n = grid->dim();
  if (m_spec.n != n) throw Error(ErrorKind::DimensionMismatch, "run_algorithm: dimension mismatch");
  if (n < 2) throw Error(ErrorKind::Precondition, "run_algorithm: dimension must be at least 2");
  if (m_spec.is_generated()) {
    const auto& gen = std::get<OperatorFieldSpec::Generated>(m_spec.source);
    if (gen.include_f_n)
      throw Error(ErrorKind::Precondition, "run_algorithm: M must have zero diagonal");
  } else {
    throw Error(ErrorKind::Precondition, "run_algorithm: M must be a generated field");
  }
  if (static_cast<int>(r.size()) != n - 1)
    throw Error(ErrorKind::ArityMismatch, "run_algorithm: expected n-1 integration constants");
  if (q.arity() != 1) throw Error(ErrorKind::ArityMismatch, "run_algorithm: q must depend on one variable");

  // Step 0: v^n = int_0^{u^n} q.
  GridFunction q_values = grid_sample_axis(grid, q, n - 1);
  for (std::size_t flat = 0; flat < q_values.values.size(); ++flat) {
    if (std::abs(q_values.values[flat]) <= options.q_lower_bound)
      throw Error(ErrorKind::Precondition,
                  "run_algorithm: q vanishes at node " + node_string(*grid, flat));
  }

  FieldOnGrid m = eval_field_on_grid(m_spec, grid);
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    if (std::abs(m.coeff[static_cast<std::size_t>(n - 2)].values[flat]) < options.m_lower_bound)
      throw Error(ErrorKind::RegularityViolation,
                  "run_algorithm: m_{n-1} below bound at node " + node_string(*grid, flat));
  }

  TransformResult result;
  result.v.resize(static_cast<std::size_t>(n));
  result.v[static_cast<std::size_t>(n - 1)] = cumulative_integral(q_values, n - 1);

  // Steps 1..4: descend from v^{n-1} to v^1.
  for (int target = n - 1; target >= 1; --target) {
    const GridFunction& prev = result.v[static_cast<std::size_t>(target)];
    std::vector<GridFunction> dv;
    dv.reserve(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) dv.push_back(partial_derivative(prev, a));

    OmegaSolve solved = solve_omega(m, std::span<const GridFunction>(dv), options);

    // Closedness diagnostics on the solved form.
    const auto dw = all_partials(std::span<const GridFunction>(solved.omega));
    double sym = 0.0;
    double mm = 0.0;
    double w_scale = 0.0;
    for (const auto& per_axis : dw) {
      for (const auto& gf : per_axis) w_scale = std::max(w_scale, gf.max_abs());
    }
    for (std::size_t flat = 0; flat < grid->size(); ++flat) {
      if (!grid->interior(flat, options.interior_margin)) continue;
      // dw(d_a, d_b) with w_n = 0
      auto curl = [&](int a, int b) {
        const double dab = b < n - 1 ? dw[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)].values[flat] : 0.0;
        const double dba = a < n - 1 ? dw[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].values[flat] : 0.0;
        return dab - dba;
      };
      for (int a = 0; a < n - 1; ++a) {
        for (int b = a + 1; b < n - 1; ++b) sym = std::max(sym, std::abs(curl(a, b)));
      }
      for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
          double acc = 0.0;
          for (int a = 1; a <= n; ++a) {
            const double mai = m_entry(m, flat, a, i);
            if (mai == 0.0) continue;
            for (int b = 1; b <= n; ++b) {
              const double mbj = m_entry(m, flat, b, j);
              if (mbj == 0.0) continue;
              acc += mai * mbj * curl(a - 1, b - 1);
            }
          }
          mm = std::max(mm, std::abs(acc));
        }
      }
    }
    sym /= 1.0 + w_scale;
    mm /= 1.0 + w_scale;
    if (sym > options.closedness_tolerance)
      throw Error(ErrorKind::ClosednessViolation,
                  "run_algorithm: solved form is not closed (residual " + std::to_string(sym) + ")");

    result.v[static_cast<std::size_t>(target - 1)] = primitive_of_closed_form(
        std::span<const GridFunction>(solved.omega), &r[static_cast<std::size_t>(target - 1)]);
    result.levels.push_back({target, solved.consistency, sym, mm});
    result.omega_trace.push_back(std::move(solved.omega));
  }

  result.sys = verify_sys(std::span<const GridFunction>(result.v), m, options);

  // Jacobian structure: upper triangular with successive diagonal ratio m_{n-1}.
  const auto dvdu = all_partials(std::span<const GridFunction>(result.v));
  double sub = 0.0;
  double dv_scale = 0.0;
  double ratio_dev = 0.0;
  double min_det = std::numeric_limits<double>::infinity();
  for (const auto& per_axis : dvdu) {
    for (const auto& gf : per_axis) dv_scale = std::max(dv_scale, gf.max_abs());
  }
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    if (!grid->interior(flat, options.interior_margin)) continue;
    Matrix jac(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        jac(i, j) = dvdu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].values[flat];
        if (j < i) sub = std::max(sub, std::abs(jac(i, j)));
      }
    }
    min_det = std::min(min_det, std::abs(determinant(jac)));
    const double lead = m.coeff[static_cast<std::size_t>(n - 2)].values[flat];
    for (int s = 0; s + 1 < n; ++s) {
      const double d0 = jac(s, s);
      const double d1 = jac(s + 1, s + 1);
      if (std::abs(d0) > 1e-8) ratio_dev = std::max(ratio_dev, std::abs(d1 / d0 - lead));
    }
  }
  result.jacobian.max_subdiagonal = sub / (1.0 + dv_scale);
  result.jacobian.max_diag_ratio_dev = ratio_dev;
  result.jacobian.min_abs_det = min_det;
  return result;
}

PushforwardReport pushforward_check(std::span<const GridFunction> v,
                                    const OperatorFieldSpec& l_spec,
                                    const TransformOptions& options) {
  const auto grid = v[0].grid;
  const int n = grid->dim();
  if (static_cast<int>(v.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "pushforward_check: expected n functions");
  if (l_spec.n != n) throw Error(ErrorKind::DimensionMismatch, "pushforward_check: dimension mismatch");
  require_interior(*grid, options.interior_margin);

  const auto dvdu = all_partials(v);
  Matrix jdense(n, n);
  for (int i = 0; i + 1 < n; ++i) jdense(i, i + 1) = 1.0;

  PushforwardReport report;
  report.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    if (!grid->interior(flat, options.interior_margin)) continue;
    Matrix jac(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        jac(i, j) = dvdu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].values[flat];
    }
    const double det = determinant(jac);
    report.min_abs_det = std::min(report.min_abs_det, std::abs(det));
    auto inv = try_inverse(jac);
    if (!inv || std::abs(det) < options.jacobian_det_tolerance)
      throw Error(ErrorKind::SingularJacobian,
                  "pushforward_check: Jacobian is singular at node " + node_string(*grid, flat));

    const std::vector<double> u = grid->point(flat);
    const Matrix ldense = to_dense(eval_field(l_spec, std::span<const double>(u)));
    const Matrix pushed = jac * ldense * *inv;
    const double scale = 1.0 + pushed.max_abs();

    double off = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) off = std::max(off, std::abs(pushed(i, j)));
    }
    for (int s = 0; s < n; ++s) {
      double mean = 0.0;
      int count = 0;
      for (int i = 0; i + s < n; ++i) {
        mean += pushed(i, i + s);
        ++count;
      }
      mean /= count;
      for (int i = 0; i + s < n; ++i) off = std::max(off, std::abs(pushed(i, i + s) - mean));
    }
    report.max_off_toeplitz = std::max(report.max_off_toeplitz, off / scale);

    const double vs_j = (pushed - jdense).max_abs() / scale;
    report.max_vs_j = std::max(report.max_vs_j, vs_j);
  }
  return report;
}

namespace {

// Toeplitz coefficients of h_1(P) J^{n-1} + ... + h_n(P) Id at the point u.
ToeplitzCoeffs j_preserving_coeffs(std::span<const Expression> h, std::span<const double> u) {
  const int n = static_cast<int>(u.size());
  BasicToeplitz<double> p;
  p.g.assign(u.begin(), u.end());
  ToeplitzCoeffs acc = toeplitz_zero(n);
  for (int k = 0; k < n; ++k) {
    ToeplitzCoeffs hk = matrix_function(h[static_cast<std::size_t>(k)], p);
    acc = toeplitz_add(acc, toeplitz_mul(hk, toeplitz_j_power(n, n - 1 - k)));
  }
  return acc;
}

}  // namespace

JPreservingResult j_preserving_map(int n, std::span<const Expression> h,
                                   const std::shared_ptr<const Grid>& grid,
                                   const TransformOptions& options) {
  if (static_cast<int>(h.size()) != n)
    throw Error(ErrorKind::ArityMismatch, "j_preserving_map: expected n functions of one variable");
  for (const Expression& hi : h) {
    if (hi.arity() != 1)
      throw Error(ErrorKind::ArityMismatch, "j_preserving_map: each h_i must have one variable");
  }
  if (grid->dim() != n) throw Error(ErrorKind::DimensionMismatch, "j_preserving_map: dimension mismatch");
  require_interior(*grid, options.interior_margin);

  JPreservingResult result;
  result.w.resize(static_cast<std::size_t>(n));
  for (auto& w : result.w) {
    w.grid = grid;
    w.values.assign(grid->size(), 0.0);
  }
  parallel_for(grid->size(), [&](std::size_t flat) {
    const std::vector<double> u = grid->point(flat);
    const ToeplitzCoeffs coeffs = j_preserving_coeffs(h, std::span<const double>(u));
    for (int i = 0; i < n; ++i)
      result.w[static_cast<std::size_t>(i)].values[flat] = coeffs.g[static_cast<std::size_t>(i)];
  });

  // The Jacobian determinant is governed by the derivative of the function
  // multiplying Id; record it alongside a direct numeric check.
  result.min_h_n_prime = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid->degree(); ++j) {
    const Series<double> lifted = Series<double>::variable(2, grid->nodes()[static_cast<std::size_t>(j)]);
    const Series<double> value =
        h[static_cast<std::size_t>(n - 1)].eval<Series<double>>(std::span<const Series<double>>(&lifted, 1));
    result.min_h_n_prime = std::min(result.min_h_n_prime, std::abs(value.coeff(1)));
  }

  const auto dwdu = all_partials(std::span<const GridFunction>(result.w));
  result.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < grid->size(); ++flat) {
    if (!grid->interior(flat, options.interior_margin)) continue;
    Matrix jac(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        jac(i, j) = dwdu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].values[flat];
    }
    const double det = std::abs(determinant(jac));
    result.min_abs_det = std::min(result.min_abs_det, det);
    if (det < options.jacobian_det_tolerance)
      throw Error(ErrorKind::SingularJacobian,
                  "j_preserving_map: Jacobian is singular at node " + node_string(*grid, flat));
  }
  return result;
}

std::vector<GridFunction> compose_j_preserving(std::span<const Expression> h,
                                               std::span<const GridFunction> v) {
  const auto grid = v[0].grid;
  const int n = grid->dim();
  if (static_cast<int>(v.size()) != n || static_cast<int>(h.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "compose_j_preserving: dimension mismatch");
  std::vector<GridFunction> out(static_cast<std::size_t>(n));
  for (auto& gf : out) {
    gf.grid = grid;
    gf.values.assign(grid->size(), 0.0);
  }
  parallel_for(grid->size(), [&](std::size_t flat) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)].values[flat];
    const ToeplitzCoeffs coeffs = j_preserving_coeffs(h, std::span<const double>(y));
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)].values[flat] = coeffs.g[static_cast<std::size_t>(i)];
  });
  return out;
}

}  // namespace nijtoep
