#pragma once

/**
 * @file io.hpp
 * @brief Text formats: measure records and spec strings, JSON reports,
 * Karamata curve CSV and a self-contained SVG plot.
 */

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thh/bounds.hpp"
#include "thh/convex.hpp"
#include "thh/error.hpp"
#include "thh/karamata.hpp"
#include "thh/measure.hpp"
#include "thh/residual.hpp"

namespace thh {

/// 17 significant digits, the round-trip width of a double.
inline std::string format_g17(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// {"family": "uniform"|"beta22"|"truncexp"|"discrete", "a":.., "b":..,
///  "lambda":.., "atoms": [[x, p], ...]}. a and b default to 0 and 1.
inline Measure measure_from_json(const nlohmann::json& record) {
  try {
    const std::string family = record.at("family").get<std::string>();
    const bool has_bounds = record.contains("a") || record.contains("b");
    const Interval iv{record.value("a", 0.0), record.value("b", 1.0)};
    if (family == "uniform")
      return make_uniform(iv);
    if (family == "beta22")
      return make_beta22(iv);
    if (family == "truncexp")
      return make_trunc_exp(record.at("lambda").get<double>(), iv);
    if (family == "discrete") {
      std::vector<Atom> atoms;
      for (const auto& pair : record.at("atoms")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ValidationError("discrete atoms must be [x, p] pairs");
        atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
      return make_discrete(std::move(atoms),
                           has_bounds ? std::optional<Interval>(iv) : std::nullopt);
    }
    throw ValidationError("unknown measure family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("measure record: ") + e.what());
  }
}

/// uniform | beta22 | truncexp<lambda> | discrete:<x:p,...>, each with an
/// optional @a,b suffix. Defaults to [0,1].
inline Measure parse_measure_spec(std::string_view text, const QuadConfig& cfg = {}) {
  std::optional<Interval> iv;
  std::string_view body = text;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    const auto bounds = detail::parse_reals(text.substr(at + 1), "interval");
    if (bounds.size() != 2)
      throw ValidationError("interval suffix must be @a,b");
    iv.emplace(bounds[0], bounds[1]);
    body = text.substr(0, at);
  }
  const Interval range = iv.value_or(unit_interval);

  if (body == "uniform")
    return make_uniform(range).with_quad(cfg);
  if (body == "beta22")
    return make_beta22(range).with_quad(cfg);
  if (body.starts_with("truncexp")) {
    const auto lambda = body.substr(8);
    if (lambda.empty())
      throw ValidationError("truncexp needs a rate, e.g. truncexp1");
    return make_trunc_exp(detail::parse_real(lambda, "truncexp"), range).with_quad(cfg);
  }
  if (body.starts_with("discrete:")) {
    std::vector<Atom> atoms;
    std::string_view rest = body.substr(9);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto colon = item.find(':');
      if (colon == std::string_view::npos)
        throw ValidationError("discrete atom '" + std::string(item) + "' must be x:p");
      atoms.push_back({detail::parse_real(item.substr(0, colon), "atom location"),
                       detail::parse_real(item.substr(colon + 1), "atom weight")});
      if (comma == std::string_view::npos)
        break;
      rest = rest.substr(comma + 1);
    }
    return make_discrete(std::move(atoms), range).with_quad(cfg);
  }
  throw ValidationError("unknown measure '" + std::string(text) + "'");
}

/// KIND:measure[:t] with KIND in {J, H, TH}. For TH a trailing numeric
/// segment is taken as the pivot when the rest still parses as a measure;
/// otherwise the pivot defaults to the midpoint.
inline InequalitySpec parse_inequality(std::string_view text, const QuadConfig& cfg = {}) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError("inequality '" + std::string(text) + "' must be KIND:measure[:t]");
  const auto kind_text = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind_text == "J")
    return InequalitySpec::make(Kind::jensen, parse_measure_spec(rest, cfg));
  if (kind_text == "H")
    return InequalitySpec::make(Kind::chord, parse_measure_spec(rest, cfg));
  if (kind_text == "TH") {
    if (const auto last = rest.rfind(':'); last != std::string_view::npos) {
      std::optional<double> t;
      std::optional<Measure> m;
      try {
        t = detail::parse_real(rest.substr(last + 1), "pivot");
        m.emplace(parse_measure_spec(rest.substr(0, last), cfg));
      } catch (const ValidationError&) {
        t.reset();
      }
      if (t && m)
        return InequalitySpec::make(Kind::three_point, *m, *t);
    }
    return InequalitySpec::make(Kind::three_point, parse_measure_spec(rest, cfg));
  }
  throw ValidationError("unknown inequality kind '" + std::string(kind_text) + "'");
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ThreePointWeights& w) {
  return {{"p_a", w.p_a}, {"p_t", w.p_t}, {"p_b", w.p_b}, {"t", w.t}};
}

inline nlohmann::json to_json(const BoundsResult& r) {
  nlohmann::json j;
  j["jensen_lower"] = r.jensen_lower;
  j["integral"] = r.integral;
  j["th_upper"] = r.th_upper;
  j["h_upper"] = r.h_upper;
  j["t"] = r.t;
  j["residual_th"] = r.th_upper - r.integral;
  j["residual_h"] = r.h_upper - r.integral;
  j["residual_jensen"] = r.integral - r.jensen_lower;
  j["weights"] = to_json(r.weights);
  j["ordered"] = r.ordered;
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// Exactly {"direct", "curvature", "kappa", "ar", "notes"}.
inline nlohmann::json to_json(const ResidualReport& r) {
  return {{"direct", r.direct},
          {"curvature", optional_json(r.curvature)},
          {"kappa", r.kappa},
          {"ar", optional_json(r.ar)},
          {"notes", r.notes}};
}

inline ResidualReport residual_report_from_json(const nlohmann::json& j) {
  ResidualReport r;
  r.direct = j.at("direct").get<double>();
  if (!j.at("curvature").is_null())
    r.curvature = j.at("curvature").get<double>();
  r.kappa = j.at("kappa").get<double>();
  if (!j.at("ar").is_null())
    r.ar = j.at("ar").get<double>();
  r.notes = j.at("notes").get<std::string>();
  return r;
}

inline nlohmann::json to_json(const TableCell& c) {
  return {{"inequality", kind_name(c.kind)},
          {"measure", c.measure},
          {"ar", c.ar},
          {"ar_x1000_rounded", c.scaled},
          {"published_x1000", c.published},
          {"match", c.match},
          {"method", "closed-form Karamata function, adaptive Gauss-Kronrod quadrature"}};
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

inline std::string curve_filename(const KaramataCurve& curve) {
  return curve.kind + "_" + curve.measure + "_" + std::to_string(curve.grid_n) + ".csv";
}

inline void write_curve_csv(const KaramataCurve& curve, std::ostream& out) {
  out << "u,phi\n";
  for (std::size_t k = 0; k < curve.u.size(); ++k)
    out << format_g17(curve.u[k]) << ',' << format_g17(curve.phi[k]) << '\n';
}

inline KaramataCurve read_curve_csv(std::istream& in) {
  KaramataCurve curve{};
  std::string line;
  if (!std::getline(in, line) || line != "u,phi")
    throw ValidationError("curve csv: missing 'u,phi' header");
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError("curve csv: malformed row '" + line + "'");
    curve.u.push_back(detail::parse_real(std::string_view(line).substr(0, comma), "u"));
    curve.phi.push_back(detail::parse_real(std::string_view(line).substr(comma + 1), "phi"));
  }
  curve.grid_n = curve.u.size();
  return curve;
}

/// Single-panel plot of several curves sharing a u-range: axes, one polyline
/// per curve and a legend.
inline void write_curves_svg(const std::vector<KaramataCurve>& curves, const std::string& title,
                             std::ostream& out) {
  if (curves.empty())
    throw ValidationError("svg: nothing to plot");
  constexpr double width = 640.0;
  constexpr double height = 420.0;
  constexpr double left = 70.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};

  double u_lo = curves.front().u.front();
  double u_hi = curves.front().u.back();
  double y_lo = 0.0;
  double y_hi = 0.0;
  for (const auto& c : curves)
    for (double v : c.phi) {
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  if (y_hi <= y_lo)
    y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  auto px = [&](double u) { return left + (u - u_lo) / (u_hi - u_lo) * (width - left - right); };
  auto py = [&](double v) { return height - bottom - (v - y_lo) / (y_hi - y_lo) * (height - top - bottom); };
  auto num = [](double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", v);
    return std::string(buffer);
  };
  auto label = [](double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4g", v);
    return std::string(buffer);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(y_lo)) << "\" x2=\""
      << num(width - right) << "\" y2=\"" << num(py(y_lo)) << "\"/>\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(y_lo)) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(top) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double u = u_lo + (u_hi - u_lo) * k / 4.0;
    const double v = y_lo + (y_hi - y_lo) * k / 4.0;
    out << "<text x=\"" << num(px(u)) << "\" y=\"" << num(height - bottom + 16)
        << "\" text-anchor=\"middle\">" << label(u) << "</text>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4)
        << "\" text-anchor=\"end\">" << label(v) << "</text>\n";
  }
  out << "<text x=\"" << num((left + width - right) / 2) << "\" y=\"" << num(height - 12)
      << "\" text-anchor=\"middle\">u</text>\n";
  out << "<text x=\"16\" y=\"" << num((top + height - bottom) / 2)
      << "\" text-anchor=\"middle\">phi</text>\n";
  out << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    out << "<polyline fill=\"none\" stroke=\"" << colors[i % 5]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < c.u.size(); ++k)
      out << (k ? " " : "") << num(px(c.u[k])) << ',' << num(py(c.phi[k]));
    out << "\"/>\n";
    const double ly = top + 14.0 + 16.0 * static_cast<double>(i);
    out << "<line x1=\"" << num(width - right - 90) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(width - right - 70) << "\" y2=\"" << num(ly - 4) << "\" stroke=\""
        << colors[i % 5] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(width - right - 64) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << c.kind << "</text>\n";
  }
  out << "</svg>\n";
}

} // namespace thh
