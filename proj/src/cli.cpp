#include "nijtoep/cli.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "nijtoep/config.hpp"
#include "nijtoep/conditions.hpp"
#include "nijtoep/generator.hpp"
#include "nijtoep/transform.hpp"

namespace nijtoep {

namespace {

using Json = nlohmann::ordered_json;

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax:
    case ErrorKind::UnknownVariable:
    case ErrorKind::UnknownFunction:
    case ErrorKind::Config:
    case ErrorKind::ArityMismatch:
    case ErrorKind::OrderMismatch:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::Precondition:
      return true;
    default:
      return false;
  }
}

struct Overrides {
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string dump_path;
};

struct Problem {
  int n = 0;
  double delta = 0.5;
  int degree = 0;  // resolved after n is known
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
  int samples = 100;
  double regularity_threshold = kRegularityThreshold;
  double pushforward_tolerance = 1e-6;
  double m_lower_bound = 1e-4;
};

Problem read_problem(const TomlDoc& doc, const Overrides& overrides, double default_tolerance) {
  const TomlSection* section = doc.find("problem");
  if (!section) throw Error(ErrorKind::Config, "missing [problem] section");
  Problem problem;
  problem.tolerance = default_tolerance;
  const TomlValue* n = section->find("n");
  if (!n) throw Error(ErrorKind::Config, "[problem] must declare n");
  problem.n = static_cast<int>(n->as_integer("n"));
  if (problem.n < 2 || problem.n > 6)
    throw Error(ErrorKind::Config, "[problem] n must be between 2 and 6");
  if (const TomlValue* v = section->find("delta")) problem.delta = v->as_number("delta");
  if (const TomlValue* v = section->find("degree")) problem.degree = static_cast<int>(v->as_integer("degree"));
  if (const TomlValue* v = section->find("tolerance")) problem.tolerance = v->as_number("tolerance");
  if (const TomlValue* v = section->find("seed")) problem.seed = static_cast<std::uint64_t>(v->as_integer("seed"));
  if (const TomlValue* v = section->find("samples")) problem.samples = static_cast<int>(v->as_integer("samples"));
  if (const TomlValue* v = section->find("regularity_threshold"))
    problem.regularity_threshold = v->as_number("regularity_threshold");
  if (const TomlValue* v = section->find("pushforward_tolerance"))
    problem.pushforward_tolerance = v->as_number("pushforward_tolerance");
  if (const TomlValue* v = section->find("m_lower_bound"))
    problem.m_lower_bound = v->as_number("m_lower_bound");
  if (problem.degree == 0) problem.degree = problem.n <= 4 ? 16 : 10;
  if (overrides.tolerance) problem.tolerance = *overrides.tolerance;
  if (overrides.seed) problem.seed = *overrides.seed;
  return problem;
}

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::vector<double>> sample_box(int n, int count, double delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) u[static_cast<std::size_t>(a)] = delta * unit_double(rng);
    points.push_back(std::move(u));
  }
  return points;
}

// Explicit point list: coordinates separated by spaces, points by semicolons.
std::vector<std::vector<double>> parse_point_list(const std::string& text, int n) {
  std::vector<std::vector<double>> points;
  std::istringstream stream(text);
  std::string chunk;
  while (std::getline(stream, chunk, ';')) {
    std::istringstream coords(chunk);
    std::vector<double> u;
    double x = 0.0;
    while (coords >> x) u.push_back(x);
    if (u.empty()) continue;
    if (static_cast<int>(u.size()) != n)
      throw Error(ErrorKind::Config, "point '" + chunk + "' does not have " + std::to_string(n) + " coordinates");
    points.push_back(std::move(u));
  }
  if (points.empty()) throw Error(ErrorKind::Config, "empty point list");
  return points;
}

std::vector<std::vector<double>> points_for(const TomlDoc& doc, const Problem& problem) {
  const TomlSection* section = doc.find("problem");
  if (const TomlValue* v = section->find("points"))
    return parse_point_list(v->as_string("points"), problem.n);
  return sample_box(problem.n, problem.samples, problem.delta, problem.seed);
}

struct ParsedField {
  OperatorFieldSpec spec;
  Json echo;
};

// A field section holds either g1..gn (Direct, in u1..un) or f1..fn
// (Generated; the first n-1 in (p, q), f_n in x, and f_n may be omitted for
// a zero diagonal).
ParsedField parse_field_section(const TomlSection& section, int n) {
  const std::vector<std::string> pq = {"p", "q"};
  const std::vector<std::string> x = {"x"};
  const std::vector<std::string> coords = coordinate_names(n);

  const bool has_g = section.find("g1") != nullptr;
  const bool has_f = section.find("f1") != nullptr;
  if (has_g == has_f)
    throw Error(ErrorKind::Config,
                "[" + section.name + "] must declare either g1..g" + std::to_string(n) +
                    " or f1..f" + std::to_string(n));

  ParsedField parsed;
  if (has_g) {
    std::vector<Expression> g;
    Json echo = Json::array();
    for (int i = 1; i <= n; ++i) {
      const TomlValue* v = section.find("g" + std::to_string(i));
      if (!v) throw Error(ErrorKind::Config, "[" + section.name + "] is missing g" + std::to_string(i));
      const std::string& text = v->as_string("g" + std::to_string(i));
      g.push_back(Expression::parse(text, coords));
      echo.push_back(text);
    }
    parsed.spec = direct_field(std::move(g));
    parsed.echo = Json{{"type", "direct"}, {"g", echo}};
  } else {
    std::vector<Expression> f;
    Json echo = Json::array();
    for (int i = 1; i <= n - 1; ++i) {
      const TomlValue* v = section.find("f" + std::to_string(i));
      if (!v) throw Error(ErrorKind::Config, "[" + section.name + "] is missing f" + std::to_string(i));
      const std::string& text = v->as_string("f" + std::to_string(i));
      f.push_back(Expression::parse(text, pq));
      echo.push_back(text);
    }
    bool include_f_n = false;
    if (const TomlValue* v = section.find("f" + std::to_string(n))) {
      const std::string& text = v->as_string("f" + std::to_string(n));
      f.push_back(Expression::parse(text, x));
      echo.push_back(text);
      include_f_n = true;
    }
    parsed.spec = generated_field(n, std::move(f), include_f_n);
    parsed.echo = Json{{"type", "generated"}, {"f", echo}, {"include_f_n", include_f_n}};
  }
  return parsed;
}

void emit(const Json& report, const Overrides& overrides, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (overrides.out_path.empty()) {
    out << text;
  } else {
    std::ofstream file(overrides.out_path, std::ios::binary);
    if (!file) throw Error(ErrorKind::Config, "cannot write report to '" + overrides.out_path + "'");
    file << text;
  }
}

Json summary_json(const ClassifySummary& summary, double tolerance) {
  Json forms = Json::object();
  for (std::size_t f = 0; f < kAllForms.size(); ++f) {
    forms[form_name(kAllForms[f])] = Json{{"passed", summary.passes[f]},
                                          {"max_residual", summary.max_residuals[f]}};
  }
  return Json{{"tolerance", tolerance},
              {"nijenhuis_by_torsion", summary.nijenhuis_by_torsion},
              {"max_torsion", summary.max_torsion},
              {"max_haantjes", summary.max_haantjes},
              {"forms", forms},
              {"gl_regular_everywhere", summary.gl_regular_everywhere},
              {"min_gl_witness", summary.min_gl_witness},
              {"torsion_without_conditions", summary.torsion_without_conditions}};
}

Json per_point_json(const std::vector<PointReport>& details) {
  Json rows = Json::array();
  for (const PointReport& pr : details) {
    Json forms = Json::object();
    for (std::size_t f = 0; f < kAllForms.size(); ++f) {
      forms[form_name(kAllForms[f])] = Json{{"residual", pr.residuals[f]}, {"passed", pr.passed[f]}};
    }
    rows.push_back(Json{{"point", pr.point},
                        {"torsion", pr.torsion},
                        {"haantjes", pr.haantjes},
                        {"gl_witness", pr.gl_witness},
                        {"forms", forms}});
  }
  return rows;
}

int run_field_certification(const char* command, const TomlDoc& doc, const Overrides& overrides,
                            std::ostream& out, bool direct_only) {
  const Problem problem = read_problem(doc, overrides, 1e-9);
  const TomlSection* functions = doc.find("functions");
  if (!functions) throw Error(ErrorKind::Config, "missing [functions] section");
  ParsedField field = parse_field_section(*functions, problem.n);
  if (direct_only && field.spec.is_generated())
    throw Error(ErrorKind::Config, "check expects a direct field (g1..gn)");

  const auto points = points_for(doc, problem);
  std::vector<PointReport> details;
  const ClassifySummary summary =
      classify(field.spec, std::span<const std::vector<double>>(points), problem.tolerance,
               problem.regularity_threshold, &details);
  const bool all_forms = summary.passes[0] && summary.passes[1] && summary.passes[2] && summary.passes[3];
  const bool certified = summary.nijenhuis_by_torsion && all_forms;

  Json report{{"command", command},
              {"n", problem.n},
              {"delta", problem.delta},
              {"seed", problem.seed},
              {"points", points.size()},
              {"field", field.echo},
              {"summary", summary_json(summary, problem.tolerance)},
              {"certified", certified},
              {"per_point", per_point_json(details)}};
  emit(report, overrides, out);
  return certified ? 0 : 2;
}

int cmd_transform(const TomlDoc& doc, const Overrides& overrides, std::ostream& out) {
  const Problem problem = read_problem(doc, overrides, 1e-8);
  const int n = problem.n;
  const TomlSection* functions = doc.find("functions");
  if (!functions) throw Error(ErrorKind::Config, "missing [functions] section");
  if (functions->find("f" + std::to_string(n)))
    throw Error(ErrorKind::Config, "transform: M must have zero diagonal, drop f" + std::to_string(n));
  ParsedField m_field = parse_field_section(*functions, n);
  if (!m_field.spec.is_generated())
    throw Error(ErrorKind::Config, "transform expects generator functions f1..f" + std::to_string(n - 1));

  const TomlSection* tsection = doc.find("transform");
  if (!tsection) throw Error(ErrorKind::Config, "missing [transform] section");
  const TomlValue* qv = tsection->find("q");
  if (!qv) throw Error(ErrorKind::Config, "[transform] must declare q");
  const std::vector<std::string> x = {"x"};
  const Expression q = Expression::parse(qv->as_string("q"), x);
  std::vector<Expression> r;
  Json r_echo = Json::array();
  for (int i = 1; i <= n - 1; ++i) {
    std::string text = "0";
    if (const TomlValue* v = tsection->find("r" + std::to_string(i)))
      text = v->as_string("r" + std::to_string(i));
    r.push_back(Expression::parse(text, x));
    r_echo.push_back(text);
  }

  TransformOptions options;
  options.tolerance = problem.tolerance;
  options.m_lower_bound = problem.m_lower_bound;

  const auto grid = Grid::make(n, problem.degree, problem.delta);
  const TransformResult result =
      run_algorithm(m_field.spec, q, std::span<const Expression>(r), grid, options);

  Json levels = Json::array();
  for (const LevelReport& level : result.levels) {
    levels.push_back(Json{{"v", level.level},
                          {"consistency", level.consistency},
                          {"closedness_sym", level.closedness_sym},
                          {"closedness_mm", level.closedness_mm}});
  }

  bool passed = result.sys.min_dv1_du1 > 1e-10;
  for (double res : result.sys.residuals) passed = passed && res <= problem.tolerance;

  const PushforwardReport m_push =
      pushforward_check(std::span<const GridFunction>(result.v), m_field.spec, options);
  passed = passed && m_push.max_vs_j <= problem.pushforward_tolerance;

  Json push = Json::object();
  push["M"] = Json{{"max_vs_J", m_push.max_vs_j},
                   {"max_off_toeplitz", m_push.max_off_toeplitz},
                   {"min_abs_det", m_push.min_abs_det}};
  for (const TomlSection& section : doc.sections) {
    if (section.name.size() < 2 || section.name[0] != 'L') continue;
    ParsedField l_field = parse_field_section(section, n);
    const PushforwardReport l_push =
        pushforward_check(std::span<const GridFunction>(result.v), l_field.spec, options);
    passed = passed && l_push.max_off_toeplitz <= problem.pushforward_tolerance;
    push[section.name] = Json{{"max_off_toeplitz", l_push.max_off_toeplitz},
                              {"max_vs_J", l_push.max_vs_j},
                              {"field", l_field.echo}};
  }

  Json report{{"command", "transform"},
              {"n", n},
              {"degree", problem.degree},
              {"delta", problem.delta},
              {"tolerance", problem.tolerance},
              {"pushforward_tolerance", problem.pushforward_tolerance},
              {"field", m_field.echo},
              {"q", qv->as_string("q")},
              {"r", r_echo},
              {"levels", levels},
              {"sys_residuals", result.sys.residuals},
              {"sys_residuals_raw", result.sys.raw},
              {"min_dv1_du1", result.sys.min_dv1_du1},
              {"jacobian",
               Json{{"max_subdiagonal", result.jacobian.max_subdiagonal},
                    {"max_diag_ratio_dev", result.jacobian.max_diag_ratio_dev},
                    {"min_abs_det", result.jacobian.min_abs_det}}},
              {"pushforward", push},
              {"passed", passed}};

  if (!overrides.dump_path.empty()) {
    Json dump{{"n", n},
              {"degree", problem.degree},
              {"delta", problem.delta},
              {"nodes", grid->nodes()},
              {"v", Json::array()}};
    for (const GridFunction& vi : result.v) dump["v"].push_back(vi.values);
    std::ofstream file(overrides.dump_path, std::ios::binary);
    if (!file) throw Error(ErrorKind::Config, "cannot write dump to '" + overrides.dump_path + "'");
    file << dump.dump(2) << "\n";
  }

  emit(report, overrides, out);
  return passed ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nijenhuis operator fields in upper triangular Toeplitz form"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  double tolerance_flag = 0.0;
  std::uint64_t seed_flag = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "TOML config file")->required();
    cmd->add_option("--tolerance", tolerance_flag, "override the config tolerance");
    cmd->add_option("--seed", seed_flag, "override the config seed");
    cmd->add_option("--out", overrides.out_path, "write the JSON report to a file");
  };

  CLI::App* generate = app.add_subcommand("generate", "build a field from generator functions and certify it");
  add_common(generate);
  CLI::App* check = app.add_subcommand("check", "run torsion and condition checks on a direct field");
  add_common(check);
  CLI::App* transform = app.add_subcommand("transform", "run the coordinate-transform pipeline");
  add_common(transform);
  transform->add_option("--dump", overrides.dump_path, "write the grid values of v to a file");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("nijtoep");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* active = generate->parsed() ? generate : (check->parsed() ? check : transform);
  if (active->count("--tolerance") > 0) overrides.tolerance = tolerance_flag;
  if (active->count("--seed") > 0) overrides.seed = seed_flag;

  try {
    const TomlDoc doc = load_toml_file(config_path);
    if (generate->parsed()) return run_field_certification("generate", doc, overrides, out, false);
    if (check->parsed()) return run_field_certification("check", doc, overrides, out, true);
    return cmd_transform(doc, overrides, out);
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << " (byte offset " << e.offset() << ")\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nijtoep
