#pragma once

#include <span>
#include <vector>

#include "nijtoep/conditions.hpp"
#include "nijtoep/field.hpp"

namespace nijtoep {

struct GeneratorOptions {
  // When set, reject generators with |f_{n-1}(0,0)| at or below the threshold;
  // such fields are not gl-regular at the origin.
  bool require_regular = false;
  double regularity_threshold = kRegularityThreshold;
};

// Constructor for Nijenhuis operators: n-1 functions of (p, q) and one
// function of a single variable generate L = sum f_i(P,Q) J^{n-i} + f_n(P).
// include_f_n = false drops the diagonal term, producing the nilpotent-shaped
// fields used by the coordinate-transform pipeline.
OperatorFieldSpec generate_operator(int n, std::vector<Expression> f, bool include_f_n,
                                    const GeneratorOptions& options = {});

struct CertifyReport {
  ClassifySummary summary;
  bool certified = false;  // torsion and all four condition forms pass
};

CertifyReport certify(const OperatorFieldSpec& spec,
                      std::span<const std::vector<double>> points, double tolerance);

}  // namespace nijtoep
