#pragma once

/**
 * @file bounds.hpp
 * @brief Jensen lower bound, chord (Hermite-Hadamard) upper bound and the
 * three-point upper bound with interior pivot t.
 *
 * For a pivot t in (a,b) the three-point bound replaces the chord over
 * [a,b] by two chords over [a,t] and [t,b]. Integrating those chords
 * against G gives E f(X) <= p_a f(a) + p_t f(t) + p_b f(b) with
 *
 *   p_a = int_[a,t] (t-x) dG / (t-a)
 *   p_b = int_(t,b] (x-t) dG / (b-t)
 *   p_t = int_[a,t] (x-a) dG / (t-a) + int_(t,b] (b-x) dG / (b-t)
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thh/convex.hpp"
#include "thh/error.hpp"
#include "thh/measure.hpp"

namespace thh {

struct ThreePointWeights {
  double p_a;
  double p_t;
  double p_b;
  double t;

  double sum() const noexcept { return p_a + p_t + p_b; }
};

struct BoundsResult {
  double jensen_lower;
  double integral;
  double h_upper;
  double th_upper;
  double t;
  ThreePointWeights weights;
  bool ordered;
  std::vector<std::string> warnings;
};

struct PivotResult {
  double t_star;
  double d_star;
};

struct PivotSearch {
  int grid = 64;
  double t_tol = 1e-8;
};

inline constexpr double ordering_tol = 1e-9;

namespace detail {

inline void require_pivot(const Measure& m, double t, const char* who) {
  if (!std::isfinite(t) || !m.interval().contains_open(t))
    throw ValidationError(std::string(who) + ": pivot t=" + format_number(t) +
                          " must lie strictly inside (" + format_number(m.interval().a()) +
                          ", " + format_number(m.interval().b()) + ")");
}

inline std::vector<double> kinks_with(const ConvexFn& f, double extra) {
  std::vector<double> kinks = f.kinks;
  kinks.push_back(extra);
  return kinks;
}

} // namespace detail

/// int_[a,b] f dG.
inline double integral_of(const Measure& m, const ConvexFn& f) {
  return expectation(f.eval, m, f.kinks);
}

inline double jensen_lower(const Measure& m, const ConvexFn& f) { return f(m.mean()); }

inline double h_upper(const Measure& m, const ConvexFn& f) {
  const double a = m.interval().a();
  const double b = m.interval().b();
  const double c = m.mean();
  return (b - c) / (b - a) * f(a) + (c - a) / (b - a) * f(b);
}

/// The pivot weight is integrated independently of p_a and p_b so that the
/// sum-to-one identity is a real check rather than a construction.
inline ThreePointWeights th_weights(const Measure& m, double t) {
  detail::require_pivot(m, t, "th_weights");
  const double a = m.interval().a();
  const double b = m.interval().b();
  const double kink[] = {t};

  const double p_a = m.partial_deficit(t) / (t - a);
  const double p_b = m.partial_excess(t) / (b - t);
  const double left =
      integrate_stieltjes([a](double x) { return x - a; }, m, a, t, closed_closed, kink).value;
  const double right =
      integrate_stieltjes([b](double x) { return b - x; }, m, t, b, open_closed, kink).value;
  return {p_a, left / (t - a) + right / (b - t), p_b, t};
}

inline double th_upper(const Measure& m, const ConvexFn& f, double t) {
  const auto w = th_weights(m, t);
  return w.p_a * f(m.interval().a()) + w.p_t * f(t) + w.p_b * f(m.interval().b());
}

/// Same bound written as the chord bound plus a correction:
/// H + (f(t) - lambda f(a) - (1-lambda) f(b)) * p_t, lambda = (b-t)/(b-a).
inline double th_upper_form2(const Measure& m, const ConvexFn& f, double t) {
  const double a = m.interval().a();
  const double b = m.interval().b();
  const double lambda = (b - t) / (b - a);
  const double gap = f(t) - lambda * f(a) - (1.0 - lambda) * f(b);
  return h_upper(m, f) + gap * th_weights(m, t).p_t;
}

/// D(t) = R_TH(t) - R_H = (f(t) - lambda f(a) - (1-lambda) f(b)) * E g(X),
/// where E g(X) equals the pivot weight p_t. Always <= 0 for convex f.
inline double pivot_gap(const Measure& m, const ConvexFn& f, double t) {
  const double a = m.interval().a();
  const double b = m.interval().b();
  const double lambda = (b - t) / (b - a);
  return (f(t) - lambda * f(a) - (1.0 - lambda) * f(b)) * th_weights(m, t).p_t;
}

/// Minimizer of D over (a,b): coarse grid, then golden-section refinement
/// inside the bracket around the best grid node. Affine f gives D == 0
/// everywhere and returns the midpoint.
inline PivotResult optimal_pivot(const Measure& m, const ConvexFn& f, PivotSearch search = {}) {
  if (search.grid < 3)
    throw ValidationError("optimal_pivot: grid must have at least 3 points");
  const double a = m.interval().a();
  const double w = m.interval().width();
  const int n = search.grid;

  auto node = [&](int k) { return a + w * static_cast<double>(k) / static_cast<double>(n + 1); };
  int best = 1;
  double best_value = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double d = pivot_gap(m, f, node(k));
    scale = std::max(scale, std::abs(d));
    if (d < best_value) {
      best_value = d;
      best = k;
    }
  }
  const double f_scale = std::max({std::abs(f(a)), std::abs(f(a + w)), 1.0});
  if (scale <= 1e-14 * f_scale)
    return {m.interval().midpoint(), 0.0};

  double lo = node(best - 1);
  double hi = node(best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = pivot_gap(m, f, x1);
  double f2 = pivot_gap(m, f, x2);
  while (hi - lo > search.t_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = pivot_gap(m, f, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = pivot_gap(m, f, x2);
    }
  }
  const double t_star = 0.5 * (lo + hi);
  const double d_star = std::min({pivot_gap(m, f, t_star), 0.0});
  return {t_star, d_star};
}

inline BoundsResult all_bounds(const Measure& m, const ConvexFn& f, double t) {
  detail::require_pivot(m, t, "all_bounds");
  BoundsResult r{};
  r.t = t;
  r.weights = th_weights(m, t);
  r.jensen_lower = jensen_lower(m, f);
  r.integral = integral_of(m, f);
  r.h_upper = h_upper(m, f);
  r.th_upper = r.weights.p_a * f(m.interval().a()) + r.weights.p_t * f(t) +
               r.weights.p_b * f(m.interval().b());
  r.ordered = r.jensen_lower <= r.integral + ordering_tol &&
              r.integral <= r.th_upper + ordering_tol && r.th_upper <= r.h_upper + ordering_tol;
  if (concentrated_on_two_points(m))
    r.warnings.push_back(
        "measure is concentrated on at most two points; the three-point bound is not "
        "guaranteed to be strictly tighter than the chord bound");
  if (!r.ordered)
    r.warnings.push_back("bound ordering violated beyond tolerance; is f convex on [a,b]?");
  return r;
}

} // namespace thh
