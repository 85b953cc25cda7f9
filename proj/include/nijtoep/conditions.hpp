#pragma once

#include <array>
#include <span>
#include <vector>

#include "nijtoep/field.hpp"

namespace nijtoep {

// The four equivalent condition systems on the coefficients g_i: the covector
// system on the differentials dg_i (eq1), the double commutator of the Jacobi
// matrix with J (eq2), the column system (eq3), and the reduced two-column
// form (mod2).
enum class ConditionForm { Eq1, Eq2, Eq3, Mod2 };

inline constexpr std::array<ConditionForm, 4> kAllForms = {
    ConditionForm::Eq1, ConditionForm::Eq2, ConditionForm::Eq3, ConditionForm::Mod2};

const char* form_name(ConditionForm form);

struct ConditionReport {
  ConditionForm form = ConditionForm::Eq1;
  // Max-abs residual per equation of the system, normalized by
  // (1 + max|dg/du|) so the four forms are comparable.
  std::vector<double> per_equation_residuals;
  double max_residual = 0.0;
  bool passed = false;
};

ConditionReport check_condition_from(const Matrix& jac_g, ConditionForm form, double tolerance);
ConditionReport check_condition(const OperatorFieldSpec& spec, std::span<const double> u,
                                ConditionForm form, double tolerance);

// Per-point diagnostics gathered by classify.
struct PointReport {
  std::vector<double> point;
  double torsion = 0.0;   // normalized max-abs Nijenhuis torsion
  double haantjes = 0.0;  // normalized max-abs Haantjes torsion
  double gl_witness = 0.0;
  std::array<double, 4> residuals{};  // eq1, eq2, eq3, mod2
  std::array<bool, 4> passed{};
};

struct ClassifySummary {
  bool nijenhuis_by_torsion = false;
  double max_torsion = 0.0;
  double max_haantjes = 0.0;
  std::array<bool, 4> passes{};          // aggregated over all points, eq1..mod2
  std::array<double, 4> max_residuals{};
  bool gl_regular_everywhere = false;
  double min_gl_witness = 0.0;
  // Torsion vanishes but the condition systems fail: the g_{n-1} = 0 stratum
  // phenomenon. Only possible when gl-regularity fails somewhere.
  bool torsion_without_conditions = false;
};

ClassifySummary classify(const OperatorFieldSpec& spec,
                         std::span<const std::vector<double>> points, double tolerance,
                         double regularity_threshold = kRegularityThreshold,
                         std::vector<PointReport>* details = nullptr);

}  // namespace nijtoep
