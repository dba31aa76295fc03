#pragma once

/**
 * @file karamata.hpp
 * @brief Second measures of the Jensen, chord and three-point inequalities
 * and the Karamata function of a pair (G, H).
 *
 * An inequality  int f dG >= int f dH  (direction lower, Jensen) or
 * int f dG <= int f dH  (direction upper, chord and three-point) holds for
 * every convex f on [a,b] iff G and H share mass and mean and
 *
 *   phi(u) = int_a^u (G(x) - H(x)) dx >= 0      (lower)
 *   phi(u) = int_a^u (H(x) - G(x)) dx >= 0      (upper)
 *
 * for all u in [a,b]. phi is always oriented so that validity reads phi >= 0.
 *
 * Integrating |x - u| against G - H gives 2 phi(u), not phi(u); the test
 * suite pins this constant by direct Stieltjes quadrature.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thh/bounds.hpp"
#include "thh/error.hpp"
#include "thh/measure.hpp"
#include "thh/quad.hpp"

namespace thh {

inline constexpr double phi_tol = 1e-9;
inline constexpr double moment_tol = 1e-9;

enum class Kind { jensen, chord, three_point, custom };
enum class Direction { lower, upper };

inline std::string kind_name(Kind kind) {
  switch (kind) {
  case Kind::jensen:
    return "J";
  case Kind::chord:
    return "H";
  case Kind::three_point:
    return "TH";
  case Kind::custom:
    return "custom";
  }
  return "?";
}

inline Direction direction_of(Kind kind) {
  return kind == Kind::jensen ? Direction::lower : Direction::upper;
}

/// Discrete second measure derived from `m`. The pivot is only read for
/// the three-point kind.
inline Measure second_measure(Kind kind, const Measure& m, double t = 0.0) {
  const double a = m.interval().a();
  const double b = m.interval().b();
  const double c = m.mean();
  std::vector<Atom> atoms;
  auto add = [&atoms](double x, double p) {
    if (p > 0.0)
      atoms.push_back({x, p});
  };
  switch (kind) {
  case Kind::jensen:
    add(c, 1.0);
    break;
  case Kind::chord:
    add(a, (b - c) / (b - a));
    add(b, (c - a) / (b - a));
    break;
  case Kind::three_point: {
    const auto w = th_weights(m, t);
    add(a, w.p_a);
    add(t, w.p_t);
    add(b, w.p_b);
    break;
  }
  case Kind::custom:
    throw ValidationError("second_measure: custom inequalities have no derived measure");
  }
  Measure::Parts parts;
  parts.interval = m.interval();
  parts.atoms = std::move(atoms);
  parts.label = kind_name(kind) + "(" + m.label() + ")";
  parts.quad = m.quad();
  return Measure(std::move(parts));
}

struct MomentCheck {
  double d_mass;
  double d_mean;
  bool pass;
};

inline double total_mass(const Measure& m) {
  double mass = m.continuous_mass();
  for (const auto& atom : m.atoms())
    mass += atom.p;
  return mass;
}

inline MomentCheck check_moment_conditions(const Measure& g, const Measure& h,
                                           double tol = moment_tol) {
  const double d_mass = std::abs(total_mass(g) - total_mass(h));
  const double d_mean = std::abs(g.mean() - h.mean());
  return {d_mass, d_mean, d_mass <= tol && d_mean <= tol};
}

/// One inequality: a primary measure G, a second measure H and the direction
/// of  int f dG  vs  int f dH.
class InequalitySpec {
public:
  static InequalitySpec make(Kind kind, const Measure& g, std::optional<double> t = std::nullopt) {
    if (kind == Kind::custom)
      throw ValidationError("InequalitySpec::make: use from_pair for custom inequalities");
    double pivot = std::numeric_limits<double>::quiet_NaN();
    if (kind == Kind::three_point) {
      pivot = t.value_or(g.interval().midpoint());
      detail::require_pivot(g, pivot, "three-point inequality");
    }
    InequalitySpec spec(kind, pivot, g, second_measure(kind, g, pivot), direction_of(kind));
    spec.require_moments();
    return spec;
  }

  /// Arbitrary pair; `check_moments` = false admits pairs that violate the
  /// mass/mean preconditions (useful to exercise the dominance test).
  static InequalitySpec from_pair(const Measure& g, const Measure& h, Direction direction,
                                  bool check_moments = true) {
    if (!(g.interval() == h.interval()))
      throw ValidationError("InequalitySpec: measures must share an interval");
    InequalitySpec spec(Kind::custom, std::numeric_limits<double>::quiet_NaN(), g, h, direction);
    if (check_moments)
      spec.require_moments();
    return spec;
  }

  Kind kind() const noexcept { return kind_; }
  double pivot() const noexcept { return t_; }
  const Measure& g() const noexcept { return g_; }
  const Measure& h() const noexcept { return h_; }
  Direction direction() const noexcept { return direction_; }
  const Interval& interval() const noexcept { return g_.interval(); }
  double sign() const noexcept { return direction_ == Direction::lower ? 1.0 : -1.0; }

  std::string name() const {
    std::string n = kind_name(kind_) + ":" + g_.label();
    if (kind_ == Kind::three_point)
      n += ":" + format_number(t_);
    return n;
  }

  /// Points where phi may fail to be smooth: pivot, mean, every atom of G and H.
  std::vector<double> structural_points() const {
    std::vector<double> points{g_.mean()};
    if (kind_ == Kind::three_point)
      points.push_back(t_);
    for (const auto& atom : g_.atoms())
      points.push_back(atom.x);
    for (const auto& atom : h_.atoms())
      points.push_back(atom.x);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
  }

private:
  InequalitySpec(Kind kind, double t, Measure g, Measure h, Direction direction)
      : kind_(kind), t_(t), g_(std::move(g)), h_(std::move(h)), direction_(direction) {}

  void require_moments() const {
    const auto check = check_moment_conditions(g_, h_);
    if (!check.pass)
      throw ValidationError("InequalitySpec " + name() + ": moment conditions fail (mass " +
                            format_number(check.d_mass) + ", mean " +
                            format_number(check.d_mean) + ")");
  }

  Kind kind_;
  double t_;
  Measure g_;
  Measure h_;
  Direction direction_;
};

namespace detail {

inline void require_in(const Interval& iv, double u, const char* who) {
  if (!iv.contains(u))
    throw ValidationError(std::string(who) + ": u=" + format_number(u) + " outside [" +
                          format_number(iv.a()) + ", " + format_number(iv.b()) + "]");
}

} // namespace detail

/// phi(u) by quadrature of the CDF difference.
inline double karamata_phi_generic(const InequalitySpec& spec, double u) {
  detail::require_in(spec.interval(), u, "karamata_phi_generic");
  const double a = spec.interval().a();
  if (u == a)
    return 0.0;
  const auto& g = spec.g();
  const auto& h = spec.h();
  const auto kinks = spec.structural_points();
  const double value =
      integrate_with_kinks([&](double x) { return g.cdf(x) - h.cdf(x); }, a, u, kinks, g.quad())
          .value;
  return spec.sign() * value;
}

/// phi(u) from partial moments of G alone, for the three derived kinds.
inline double karamata_phi_closed(const InequalitySpec& spec, double u) {
  detail::require_in(spec.interval(), u, "karamata_phi_closed");
  const auto& m = spec.g();
  const double a = m.interval().a();
  const double b = m.interval().b();
  switch (spec.kind()) {
  case Kind::jensen: {
    const double c = m.mean();
    return m.partial_deficit(u) - (u >= c ? u - c : 0.0);
  }
  case Kind::chord:
    return (u - a) / (b - a) * (b - m.mean()) - m.partial_deficit(u);
  case Kind::three_point: {
    const double t = spec.pivot();
    if (u <= t)
      return (u - a) / (t - a) * m.partial_deficit(t) - m.partial_deficit(u);
    return (u - t) / (b - t) * m.partial_cdf_integral(t, b) - m.partial_cdf_integral(t, u);
  }
  case Kind::custom:
    break;
  }
  throw ValidationError("karamata_phi_closed: no closed form for custom inequalities");
}

inline bool has_closed_phi(const InequalitySpec& spec) { return spec.kind() != Kind::custom; }

inline double karamata_phi(const InequalitySpec& spec, double u) {
  return has_closed_phi(spec) ? karamata_phi_closed(spec, u) : karamata_phi_generic(spec, u);
}

/// int |x - u| d(G - H), oriented like phi. Equals 2 phi(u).
inline double abs_probe_residual(const InequalitySpec& spec, double u) {
  detail::require_in(spec.interval(), u, "abs_probe_residual");
  auto probe = [u](double x) { return std::abs(x - u); };
  const double kink[] = {u};
  return spec.sign() * (expectation(probe, spec.g(), kink) - expectation(probe, spec.h(), kink));
}

struct KaramataCurve {
  std::string kind;
  std::string measure;
  double t;  // NaN unless three-point
  std::size_t grid_n;
  std::vector<double> u;
  std::vector<double> phi;

  double min_phi() const { return *std::min_element(phi.begin(), phi.end()); }
};

inline constexpr double curve_cross_tol = 1e-8;

/// phi on an n-point uniform grid including both endpoints. When a closed
/// form exists every point is cross-checked against the generic quadrature.
inline KaramataCurve sample_curve(const InequalitySpec& spec, std::size_t grid_n,
                                  bool cross_validate = true) {
  if (grid_n < 2)
    throw ValidationError("sample_curve: grid needs at least two points");
  const auto& iv = spec.interval();
  KaramataCurve curve{kind_name(spec.kind()), spec.g().label(), spec.pivot(), grid_n, {}, {}};
  curve.u.reserve(grid_n);
  curve.phi.reserve(grid_n);
  for (std::size_t k = 0; k < grid_n; ++k) {
    const double u = k + 1 == grid_n
                         ? iv.b()
                         : iv.a() + iv.width() * static_cast<double>(k) /
                                        static_cast<double>(grid_n - 1);
    const double value = karamata_phi(spec, u);
    if (cross_validate && has_closed_phi(spec)) {
      const double generic = karamata_phi_generic(spec, u);
      if (std::abs(generic - value) > curve_cross_tol)
        throw NumericFailure("sample_curve: closed form and quadrature disagree at u=" +
                                 format_number(u),
                             value, std::abs(generic - value));
    }
    curve.u.push_back(u);
    curve.phi.push_back(value);
  }
  return curve;
}

/// True iff the moment conditions hold and phi >= -phi_tol on the grid.
inline bool dominance_test(const InequalitySpec& spec, std::size_t grid_n) {
  if (grid_n < 16)
    throw ValidationError("dominance_test: grid must have at least 16 points");
  if (!check_moment_conditions(spec.g(), spec.h()).pass)
    return false;
  const auto curve = sample_curve(spec, grid_n, false);
  return curve.min_phi() >= -phi_tol;
}

} // namespace thh
