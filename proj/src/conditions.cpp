#include "nijtoep/conditions.hpp"

#include <algorithm>
#include <cmath>

namespace nijtoep {

const char* form_name(ConditionForm form) {
  switch (form) {
    case ConditionForm::Eq1: return "eq1";
    case ConditionForm::Eq2: return "eq2";
    case ConditionForm::Eq3: return "eq3";
    case ConditionForm::Mod2: return "mod2";
  }
  return "?";
}

namespace {

double max_abs(const std::vector<double>& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

// Pullback shift on a covector: (J* a)_j = a_{j-1}.
std::vector<double> jstar(const std::vector<double>& a) {
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t j = 1; j < a.size(); ++j) out[j] = a[j - 1];
  return out;
}

// Push shift on a column: (J v)_i = v_{i+1}.
std::vector<double> jcol(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = v[i + 1];
  return out;
}

std::vector<double> jcol_pow(std::vector<double> v, int k) {
  for (int s = 0; s < k; ++s) v = jcol(v);
  return v;
}

std::vector<double> row_of(const Matrix& m, int i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (int j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

std::vector<double> col_of(const Matrix& m, int j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

std::vector<double> lin3(const std::vector<double>& a, double ca, const std::vector<double>& b,
                         double cb, const std::vector<double>* c, double cc) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = ca * a[i] + cb * b[i] + (c ? cc * (*c)[i] : 0.0);
  }
  return out;
}

}  // namespace

ConditionReport check_condition_from(const Matrix& jac_g, ConditionForm form, double tolerance) {
  const int n = jac_g.rows();
  const double denom = 1.0 + jac_g.max_abs();

  ConditionReport report;
  report.form = form;

  switch (form) {
    case ConditionForm::Eq1: {
      // 0 = J^2* dg_n;  0 = J^2* dg_{n-1} - 2 J* dg_n;
      // 0 = J^2* dg_i - 2 J* dg_{i+1} + dg_{i+2},  i = 1..n-2.
      auto dg = [&](int i) { return row_of(jac_g, i - 1); };
      report.per_equation_residuals.push_back(max_abs(jstar(jstar(dg(n)))) / denom);
      report.per_equation_residuals.push_back(
          max_abs(lin3(jstar(jstar(dg(n - 1))), 1.0, jstar(dg(n)), -2.0, nullptr, 0.0)) / denom);
      for (int i = 1; i <= n - 2; ++i) {
        const auto a = jstar(jstar(dg(i)));
        const auto b = jstar(dg(i + 1));
        const auto c = dg(i + 2);
        report.per_equation_residuals.push_back(max_abs(lin3(a, 1.0, b, -2.0, &c, 1.0)) / denom);
      }
      break;
    }
    case ConditionForm::Eq2: {
      Matrix j(n, n);
      for (int i = 0; i + 1 < n; ++i) j(i, i + 1) = 1.0;
      const Matrix c2 = commutator(commutator(jac_g, j), j);
      report.per_equation_residuals.push_back(c2.max_abs() / denom);
      break;
    }
    case ConditionForm::Eq3: {
      // J^2 dg/du^1 = 0;  J^2 dg/du^2 - 2 J dg/du^1 = 0;
      // J^2 dg/du^i - 2 J dg/du^{i-1} + dg/du^{i-2} = 0,  i = 3..n.
      auto du = [&](int i) { return col_of(jac_g, i - 1); };
      report.per_equation_residuals.push_back(max_abs(jcol_pow(du(1), 2)) / denom);
      if (n >= 2) {
        report.per_equation_residuals.push_back(
            max_abs(lin3(jcol_pow(du(2), 2), 1.0, jcol(du(1)), -2.0, nullptr, 0.0)) / denom);
      }
      for (int i = 3; i <= n; ++i) {
        const auto a = jcol_pow(du(i), 2);
        const auto b = jcol(du(i - 1));
        const auto c = du(i - 2);
        report.per_equation_residuals.push_back(max_abs(lin3(a, 1.0, b, -2.0, &c, 1.0)) / denom);
      }
      break;
    }
    case ConditionForm::Mod2: {
      // dg/du^{n-k} = k J^{k-1} dg/du^{n-1} - (k-1) J^k dg/du^n, k = 2..n-1,
      // together with 0 = J^{n-1} dg/du^{n-1}.
      auto du = [&](int i) { return col_of(jac_g, i - 1); };
      const auto dn1 = du(n - 1 >= 1 ? n - 1 : 1);
      const auto dn = du(n);
      for (int k = 2; k <= n - 1; ++k) {
        const auto rhs1 = jcol_pow(dn1, k - 1);
        const auto rhs2 = jcol_pow(dn, k);
        const auto lhs = du(n - k);
        const auto res = lin3(lhs, 1.0, rhs1, -static_cast<double>(k), &rhs2,
                              static_cast<double>(k - 1));
        report.per_equation_residuals.push_back(max_abs(res) / denom);
      }
      report.per_equation_residuals.push_back(max_abs(jcol_pow(dn1, n - 1)) / denom);
      break;
    }
  }

  report.max_residual = max_abs(report.per_equation_residuals);
  report.passed = report.max_residual <= tolerance;
  return report;
}

ConditionReport check_condition(const OperatorFieldSpec& spec, std::span<const double> u,
                                ConditionForm form, double tolerance) {
  return check_condition_from(jacobian_g(spec, u), form, tolerance);
}

ClassifySummary classify(const OperatorFieldSpec& spec,
                         std::span<const std::vector<double>> points, double tolerance,
                         double regularity_threshold, std::vector<PointReport>* details) {
  if (points.empty()) throw Error(ErrorKind::Precondition, "classify: no sample points");

  ClassifySummary summary;
  summary.passes = {true, true, true, true};
  summary.gl_regular_everywhere = true;
  summary.min_gl_witness = std::abs(eval_field(spec, points[0]).gi(spec.n > 1 ? spec.n - 1 : 1));

  for (const std::vector<double>& u : points) {
    const ToeplitzCoeffs L = eval_field(spec, std::span<const double>(u));
    const Matrix jac = jacobian_g(spec, std::span<const double>(u));
    const double scale = field_scale(L, jac);
    const Tensor12 nij = nijenhuis_from(L, jac);

    PointReport pr;
    pr.point = u;
    pr.torsion = nij.max_abs() / scale;
    pr.haantjes = haantjes_from(L, nij).max_abs() / scale;
    const GlRegularity reg = gl_regularity(L, regularity_threshold);
    pr.gl_witness = reg.witness;
    for (std::size_t f = 0; f < kAllForms.size(); ++f) {
      const ConditionReport rep = check_condition_from(jac, kAllForms[f], tolerance);
      pr.residuals[f] = rep.max_residual;
      pr.passed[f] = rep.passed;
      summary.max_residuals[f] = std::max(summary.max_residuals[f], rep.max_residual);
      summary.passes[f] = summary.passes[f] && rep.passed;
    }
    summary.max_torsion = std::max(summary.max_torsion, pr.torsion);
    summary.max_haantjes = std::max(summary.max_haantjes, pr.haantjes);
    summary.min_gl_witness = std::min(summary.min_gl_witness, std::abs(reg.witness));
    summary.gl_regular_everywhere = summary.gl_regular_everywhere && reg.regular;
    if (details) details->push_back(std::move(pr));
  }

  summary.nijenhuis_by_torsion = summary.max_torsion <= tolerance;
  const bool all_forms = summary.passes[0] && summary.passes[1] && summary.passes[2] && summary.passes[3];
  summary.torsion_without_conditions = summary.nijenhuis_by_torsion && !all_forms;
  return summary;
}

}  // namespace nijtoep
