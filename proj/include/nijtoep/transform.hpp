#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nijtoep/chart.hpp"
#include "nijtoep/field.hpp"

namespace nijtoep {

struct TransformOptions {
  double tolerance = 1e-8;              // pass bar for the system residuals
  double consistency_tolerance = 1e-7;  // bound on the first component of dv
  double closedness_tolerance = 1e-6;   // hard bar before the run aborts
  double m_lower_bound = 1e-4;          // |m_{n-1}| over the grid
  double q_lower_bound = 1e-12;         // |q| over the u^n axis
  double jacobian_det_tolerance = 1e-10;
  int interior_margin = 2;
};

// Coefficients of an operator field sampled over a grid: coeff[i] holds g_{i+1}.
struct FieldOnGrid {
  std::vector<GridFunction> coeff;

  int dim() const { return static_cast<int>(coeff.size()); }
};

FieldOnGrid eval_field_on_grid(const OperatorFieldSpec& spec,
                               const std::shared_ptr<const Grid>& grid);

struct OmegaSolve {
  std::vector<GridFunction> omega;  // omega[k] = w_{k+1}, k = 0..n-2
  double consistency = 0.0;         // normalized max |dv_1|
};

// Pointwise triangular solve of M* w = dv sweeping the covector components:
// w_{j-1} = (dv_j - sum_{i<j-1} w_i m_{n-j+i}) / m_{n-1} for j = 2..n. The
// first component of dv carries no unknown and must vanish.
OmegaSolve solve_omega(const FieldOnGrid& m, std::span<const GridFunction> dv,
                       const TransformOptions& options = {});

struct LevelReport {
  int level = 0;  // index of the constructed v^level (1-based)
  double consistency = 0.0;
  double closedness_sym = 0.0;  // max |dw_i/du^j - dw_j/du^i|, normalized
  double closedness_mm = 0.0;   // max |dw(M d_i, M d_j)|, normalized
};

struct SysReport {
  std::vector<double> residuals;   // normalized, per equation i = 1..n-1
  std::vector<double> raw;         // plain max-abs residuals
  double min_dv1_du1 = 0.0;
};

struct JacobianReport {
  double max_subdiagonal = 0.0;     // normalized lower-triangular leak
  double max_diag_ratio_dev = 0.0;  // |dv^{s+1}/du^{s+1} / (dv^s/du^s) - m_{n-1}|
  double min_abs_det = 0.0;
};

struct TransformResult {
  std::vector<GridFunction> v;  // v[i] = v^{i+1}
  std::vector<std::vector<GridFunction>> omega_trace;  // per level, outermost first
  std::vector<LevelReport> levels;
  SysReport sys;
  JacobianReport jacobian;
};

// Steps 0..4: v^n integrates q along the last axis, then each level solves
// M* w = dv and integrates w with the level's r(u^n) as the free constant.
TransformResult run_algorithm(const OperatorFieldSpec& m_spec, const Expression& q,
                              std::span<const Expression> r,
                              const std::shared_ptr<const Grid>& grid,
                              const TransformOptions& options = {});

SysReport verify_sys(std::span<const GridFunction> v, const FieldOnGrid& m,
                     const TransformOptions& options = {});
SysReport verify_sys(std::span<const GridFunction> v, const OperatorFieldSpec& m_spec,
                     const TransformOptions& options = {});

struct PushforwardReport {
  double max_off_toeplitz = 0.0;  // sub-diagonal entries and band disagreement
  double max_vs_j = 0.0;          // entrywise distance to J
  double min_abs_det = 0.0;       // of the Jacobian of v over interior nodes
};

// Conjugates L(u) by the spectral Jacobian of v at interior nodes and measures
// how far the result is from Toeplitz form (and from J itself, which is the
// expected value when L is the M that produced v).
PushforwardReport pushforward_check(std::span<const GridFunction> v,
                                    const OperatorFieldSpec& l_spec,
                                    const TransformOptions& options = {});

struct JPreservingResult {
  std::vector<GridFunction> w;  // w[i] = w^{i+1}
  double min_h_n_prime = 0.0;   // smallest |h_n'(u^n)| seen on the grid
  double min_abs_det = 0.0;
};

// Coordinate maps preserving J: w_i are the Toeplitz coefficients of
// h_1(P) J^{n-1} + ... + h_n(P) Id.
JPreservingResult j_preserving_map(int n, std::span<const Expression> h,
                                   const std::shared_ptr<const Grid>& grid,
                                   const TransformOptions& options = {});

// Pointwise composition w(v(u)) of a J-preserving map with grid functions v.
std::vector<GridFunction> compose_j_preserving(std::span<const Expression> h,
                                               std::span<const GridFunction> v);

}  // namespace nijtoep
