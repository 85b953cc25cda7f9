#include "nijtoep/generator.hpp"

#include <cmath>

namespace nijtoep {

OperatorFieldSpec generate_operator(int n, std::vector<Expression> f, bool include_f_n,
                                    const GeneratorOptions& options) {
  if (options.require_regular) {
    if (static_cast<int>(f.size()) < n - 1)
      throw Error(ErrorKind::ArityMismatch, "generate_operator: missing generator functions");
    const Expression& fn1 = f[static_cast<std::size_t>(n - 2)];
    if (fn1.arity() != 2)
      throw Error(ErrorKind::ArityMismatch, "generate_operator: f_{n-1} must have two variables");
    const double origin[2] = {0.0, 0.0};
    const double value = fn1(std::span<const double>(origin, 2));
    if (std::abs(value) <= options.regularity_threshold)
      throw Error(ErrorKind::RegularityViolation,
                  "generate_operator: f_{n-1}(0,0) is below the regularity threshold");
  }
  return generated_field(n, std::move(f), include_f_n);
}

CertifyReport certify(const OperatorFieldSpec& spec,
                      std::span<const std::vector<double>> points, double tolerance) {
  CertifyReport report;
  report.summary = classify(spec, points, tolerance);
  const auto& s = report.summary;
  report.certified =
      s.nijenhuis_by_torsion && s.passes[0] && s.passes[1] && s.passes[2] && s.passes[3];
  return report;
}

}  // namespace nijtoep
