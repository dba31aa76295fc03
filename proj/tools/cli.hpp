#pragma once

// Command-line front end. Kept in a header so the test suite can drive
// run() in-process and inspect stdout, stderr and the exit status.
//
// Exit status: 0 success, 1 --check mismatch, 2 validation error,
// 3 numeric failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thh/thh.hpp"

namespace thh::cli {

enum ExitCode : int { ok = 0, check_failed = 1, validation = 2, numeric = 3 };

struct GlobalOptions {
  double abs_tol = QuadConfig{}.abs_tol;
  double rel_tol = QuadConfig{}.rel_tol;
  int max_depth = QuadConfig{}.max_depth;
  std::size_t grid = 1001;
  std::string format;
  std::string out;
  std::optional<double> assume_kappa;
  bool check = false;

  QuadConfig quad() const {
    QuadConfig cfg;
    cfg.abs_tol = abs_tol;
    cfg.rel_tol = rel_tol;
    cfg.max_depth = max_depth;
    cfg.validate();
    return cfg;
  }
};

struct CommandOptions {
  std::string measure = "uniform";
  std::string fn;
  std::optional<double> t;
  bool optimal_t = false;
  std::string ineq;
  std::string ineq0;
};

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline nlohmann::json interval_json(const Interval& iv) { return {iv.a(), iv.b()}; }

inline void require_format(const std::string& format, std::initializer_list<const char*> allowed,
                           const char* command) {
  for (const char* f : allowed)
    if (format == f)
      return;
  throw ValidationError(std::string(command) + ": unsupported --format '" + format + "'");
}

inline nlohmann::json pivot_json(const PivotResult& p) {
  return {{"t_star", p.t_star}, {"d_star", p.d_star}};
}

inline int cmd_bounds(const GlobalOptions& g, const CommandOptions& o, std::ostream& out) {
  require_format(g.format.empty() ? "json" : g.format, {"json"}, "bounds");
  if (o.fn.empty())
    throw ValidationError("bounds: --fn is required");
  const Measure m = parse_measure_spec(o.measure, g.quad());
  const ConvexFn f = function_from_name(o.fn, m.interval());
  const double t = o.t.value_or(m.interval().midpoint());
  const BoundsResult r = all_bounds(m, f, t);

  nlohmann::json j;
  j["measure"] = m.label();
  j["interval"] = interval_json(m.interval());
  j["function"] = f.label;
  j["bounds"] = to_json(r);
  if (o.optimal_t)
    j["optimal"] = pivot_json(optimal_pivot(m, f));
  out << j.dump(2) << '\n';
  return ok;
}

inline int cmd_curve(const GlobalOptions& g, const CommandOptions& o, std::ostream& out) {
  const std::string format = g.format.empty() ? "csv" : g.format;
  require_format(format, {"csv", "svg"}, "curve");
  if (g.grid < 2)
    throw ValidationError("curve: --grid must be at least 2");
  const Measure m = parse_measure_spec(o.measure, g.quad());
  const std::filesystem::path dir = g.out.empty() ? "." : g.out;
  std::filesystem::create_directories(dir);

  std::vector<KaramataCurve> curves;
  for (Kind kind : {Kind::jensen, Kind::chord, Kind::three_point})
    curves.push_back(sample_curve(InequalitySpec::make(kind, m, o.t), g.grid));

  nlohmann::json summary;
  summary["measure"] = m.label();
  summary["grid"] = g.grid;
  summary["t"] = o.t.value_or(m.interval().midpoint());
  summary["curves"] = nlohmann::json::array();
  std::vector<std::string> files;
  for (const auto& c : curves) {
    const auto path = dir / curve_filename(c);
    std::ofstream file(path);
    if (!file)
      throw ValidationError("curve: cannot write " + path.string());
    write_curve_csv(c, file);
    files.push_back(path.string());
    summary["curves"].push_back({{"kind", c.kind},
                                 {"file", path.string()},
                                 {"min_phi", c.min_phi()},
                                 {"max_phi", *std::max_element(c.phi.begin(), c.phi.end())},
                                 {"phi_a", c.phi.front()},
                                 {"phi_b", c.phi.back()}});
  }
  if (format == "svg") {
    const auto path = dir / ("karamata_" + m.label() + "_" + std::to_string(g.grid) + ".svg");
    std::ofstream file(path);
    if (!file)
      throw ValidationError("curve: cannot write " + path.string());
    write_curves_svg(curves, "Karamata functions, " + m.label(), file);
    files.push_back(path.string());
  }
  summary["files"] = files;
  out << summary.dump(2) << '\n';
  return ok;
}

inline int cmd_table(const GlobalOptions& g, const CommandOptions& o, std::ostream& out,
                     std::ostream& err) {
  const std::string format = g.format.empty() ? "text" : g.format;
  require_format(format, {"text", "json"}, "table");
  const double t = o.t.value_or(0.5);
  if (!unit_interval.contains_open(t))
    throw ValidationError("table: pivot t must lie strictly inside (0, 1)");
  const auto cells = average_residual_table(t, g.quad());

  if (format == "json") {
    nlohmann::json j;
    j["t"] = t;
    j["columns"] = {"uniform", "truncexp1", "beta22"};
    j["rows"] = {"J", "H", "TH"};
    j["cells"] = nlohmann::json::array();
    for (const auto& c : cells)
      j["cells"].push_back(to_json(c));
    out << j.dump(2) << '\n';
  } else {
    out << "Average residual AR (t = " << t << ")\n";
    out << std::left << std::setw(6) << "" << std::right << std::setw(12) << "uniform"
        << std::setw(12) << "truncexp1" << std::setw(12) << "beta22" << '\n';
    for (std::size_t row = 0; row < 3; ++row) {
      out << std::left << std::setw(6) << kind_name(cells[3 * row].kind) << std::right;
      for (std::size_t col = 0; col < 3; ++col)
        out << std::setw(12) << fixed(cells[3 * row + col].ar);
      out << '\n';
    }
    out << "\nAR x 10^3, rounded [published]\n";
    for (std::size_t row = 0; row < 3; ++row) {
      out << std::left << std::setw(6) << kind_name(cells[3 * row].kind) << std::right;
      for (std::size_t col = 0; col < 3; ++col) {
        const auto& c = cells[3 * row + col];
        std::ostringstream cell;
        cell << c.scaled << " [" << c.published << "]";
        out << std::setw(12) << cell.str();
      }
      out << '\n';
    }
  }

  if (g.check) {
    int mismatches = 0;
    for (const auto& c : cells)
      if (!c.match) {
        ++mismatches;
        err << "check: " << kind_name(c.kind) << "/" << c.measure << " computed " << c.scaled
            << ", published " << c.published << '\n';
      }
    if (mismatches > 0) {
      err << "check: " << mismatches << " of 9 cells differ from the published table\n";
      return check_failed;
    }
    err << "check: all 9 cells match the published table\n";
  }
  return ok;
}

inline int cmd_compare(const GlobalOptions& g, const CommandOptions& o, std::ostream& out) {
  require_format(g.format.empty() ? "json" : g.format, {"json"}, "compare");
  if (o.ineq.empty() || o.ineq0.empty())
    throw ValidationError("compare: --i and --i0 are required");
  const auto quad = g.quad();
  const InequalitySpec spec = parse_inequality(o.ineq, quad);
  const InequalitySpec spec0 = parse_inequality(o.ineq0, quad);

  nlohmann::json j;
  j["i"] = spec.name();
  j["i0"] = spec0.name();
  const double ar = average_residual(spec);
  const double ar0 = average_residual(spec0);
  j["ar_i"] = ar;
  j["ar_i0"] = ar0;
  if (!(ar0 > zero_denominator_tol))
    throw ValidationError("compare: reference inequality has zero average residual");
  j["rar"] = ar / ar0;

  if (!o.fn.empty()) {
    if (!(spec.interval() == spec0.interval()))
      throw ValidationError("compare: --fn needs both inequalities on the same interval");
    const ConvexFn f = function_from_name(o.fn, spec.interval());
    nlohmann::json kappa;
    double k = 1.0;
    if (g.assume_kappa) {
      k = *g.assume_kappa;
      kappa = {{"value", k}, {"source", "assumed"}};
    } else {
      const auto fit = calibrate_kappa();
      k = fit.kappa;
      kappa = {{"value", k},
               {"source", "calibrated"},
               {"cases", fit.cases},
               {"max_abs_misfit", fit.max_abs_misfit},
               {"printed_constant", printed_kappa}};
    }
    j["kappa"] = kappa;
    const auto rr = relative_residual(f, spec, spec0);
    j["function"] = f.label;
    j["rr"] = {{"direct", rr.direct_ratio}, {"curvature", optional_json(rr.curvature_ratio)}};
    j["report_i"] = to_json(residual_report(spec, f, k));
    j["report_i0"] = to_json(residual_report(spec0, f, k));
    if (o.optimal_t)
      j["optimal"] = pivot_json(optimal_pivot(spec.g(), f));
  } else if (o.optimal_t) {
    throw ValidationError("compare: --optimal-t needs --fn");
  }
  out << j.dump(2) << '\n';
  return ok;
}

} // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Jensen, Hermite-Hadamard and three-point bounds with Karamata residuals", "thh"};
  app.require_subcommand(1);

  GlobalOptions g;
  CommandOptions o;
  std::optional<double> assume_kappa;
  app.add_option("--abs-tol", g.abs_tol, "quadrature absolute tolerance");
  app.add_option("--rel-tol", g.rel_tol, "quadrature relative tolerance");
  app.add_option("--max-depth", g.max_depth, "quadrature bisection depth limit");
  app.add_option("--grid", g.grid, "grid points for curves");
  app.add_option("--format", g.format, "output format: csv | json | svg | text");
  app.add_option("--out", g.out, "output directory for curve files");
  app.add_option("--assume-kappa", assume_kappa, "skip calibration and use this constant");
  app.add_flag("--check", g.check, "compare the table against published values");

  auto* bounds = app.add_subcommand("bounds", "Jensen, chord and three-point bounds for one f");
  bounds->add_option("--measure", o.measure, "measure spec");
  bounds->add_option("--fn", o.fn, "function name");
  bounds->add_option("--t", o.t, "pivot in (a, b)");
  bounds->add_flag("--optimal-t", o.optimal_t, "also minimize the three-point residual over t");

  auto* curve = app.add_subcommand("curve", "write Karamata curves of J, H and TH");
  curve->add_option("--measure", o.measure, "measure spec");
  curve->add_option("--t", o.t, "pivot in (a, b)");

  auto* table = app.add_subcommand("table", "average residuals over the reference measures");
  table->add_option("--t", o.t, "pivot in (0, 1)");

  auto* compare = app.add_subcommand("compare", "relative average / per-function residuals");
  compare->add_option("--i", o.ineq, "inequality KIND:measure[:t]");
  compare->add_option("--i0", o.ineq0, "reference inequality KIND:measure[:t]");
  compare->add_option("--fn", o.fn, "function name for relative residuals");
  compare->add_flag("--optimal-t", o.optimal_t, "report the optimal pivot for --fn");

  for (auto* sub : {bounds, curve, table, compare})
    sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }
  g.assume_kappa = assume_kappa;

  try {
    if (bounds->parsed())
      return detail::cmd_bounds(g, o, out);
    if (curve->parsed())
      return detail::cmd_curve(g, o, out);
    if (table->parsed())
      return detail::cmd_table(g, o, out, err);
    return detail::cmd_compare(g, o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }
}

} // namespace thh::cli
