#pragma once

/**
 * @file convex.hpp
 * @brief Convex functions on [a,b]: evaluators with optional derivatives and
 * known kinks, the piecewise-linear families used by the bounds, and a
 * mollifier producing smooth convex approximations of kinked functions.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thh/error.hpp"
#include "thh/measure.hpp"
#include "thh/quad.hpp"

namespace thh {

inline constexpr double conv_tol_analytic = 1e-12;
inline constexpr double conv_tol_mollified = 1e-8;

struct ConvexFn {
  RealFn eval;
  RealFn d1;                  // may be empty
  RealFn d2;                  // may be empty
  std::vector<double> kinks;  // points where f is not differentiable
  std::string label;

  double operator()(double x) const { return eval(x); }
  bool smooth() const noexcept { return kinks.empty(); }
};

/// Piecewise-linear convex function through (a, alpha), (t, tau), (b, beta).
struct VeeParams {
  double alpha;
  double tau;
  double beta;
  double t;
};

struct KinkTerm {
  double c;
  double u;
};

inline ConvexFn make_affine(double slope, double intercept) {
  return {[=](double x) { return slope * x + intercept; },
          [=](double) { return slope; },
          [](double) { return 0.0; },
          {},
          "affine:" + format_number(slope) + "," + format_number(intercept)};
}

inline ConvexFn make_square() {
  return {[](double x) { return x * x; },
          [](double x) { return 2.0 * x; },
          [](double) { return 2.0; },
          {},
          "square"};
}

inline ConvexFn make_exp() {
  auto e = [](double x) { return std::exp(x); };
  return {e, e, e, {}, "exp"};
}

/// x log x with 0 log 0 = 0; requires a >= 0.
inline ConvexFn make_negentropy() {
  return {[](double x) { return x == 0.0 ? 0.0 : x * std::log(x); },
          [](double x) { return std::log(x) + 1.0; },
          [](double x) { return 1.0 / x; },
          {},
          "negentropy"};
}

/// x^p for p > 1 on a nonnegative domain.
inline ConvexFn make_power(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw ValidationError("powp: exponent must exceed 1");
  return {[p](double x) { return std::pow(x, p); },
          [p](double x) { return p * std::pow(x, p - 1.0); },
          [p](double x) { return p * (p - 1.0) * std::pow(x, p - 2.0); },
          {},
          "powp:" + format_number(p)};
}

/// x -> |x - u|.
inline ConvexFn make_pivot_abs(double u, std::optional<Interval> iv = std::nullopt) {
  if (!std::isfinite(u) || (iv && !iv->contains(u)))
    throw ValidationError("abs: pivot " + format_number(u) + " outside the interval");
  return {[u](double x) { return std::abs(x - u); },
          [u](double x) { return x < u ? -1.0 : (x > u ? 1.0 : 0.0); },
          {},
          {u},
          "abs:" + format_number(u)};
}

inline ConvexFn make_vee(const VeeParams& p, const Interval& iv) {
  const double a = iv.a();
  const double b = iv.b();
  if (!iv.contains_open(p.t))
    throw ValidationError("vee: pivot t must lie strictly inside (a, b)");
  if (p.tau > std::min(p.alpha, p.beta))
    throw NotConvexError("vee: tau must not exceed min(alpha, beta)");
  const double t = p.t;
  auto eval = [=](double x) {
    if (x <= t)
      return (t - x) / (t - a) * p.alpha + (x - a) / (t - a) * p.tau;
    return (b - x) / (b - t) * p.tau + (x - t) / (b - t) * p.beta;
  };
  const double left = (p.tau - p.alpha) / (t - a);
  const double right = (p.beta - p.tau) / (b - t);
  return {eval,
          [=](double x) { return x <= t ? left : right; },
          {},
          {t},
          "vee:" + format_number(p.alpha) + "," + format_number(p.tau) + "," +
              format_number(p.beta) + "," + format_number(t)};
}

/// x -> slope x + intercept + sum c_i |x - u_i| with every c_i > 0.
inline ConvexFn make_kink_combination(double slope, double intercept,
                                      std::vector<KinkTerm> terms,
                                      std::optional<Interval> iv = std::nullopt) {
  std::vector<double> kinks;
  for (const auto& term : terms) {
    if (!(term.c > 0.0))
      throw NotConvexError("kink combination: coefficients must be positive");
    if (iv && !iv->contains_open(term.u))
      throw ValidationError("kink combination: kink locations must lie inside (a, b)");
    kinks.push_back(term.u);
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  auto eval = [=](double x) {
    double v = slope * x + intercept;
    for (const auto& term : terms)
      v += term.c * std::abs(x - term.u);
    return v;
  };
  auto d1 = [=](double x) {
    double v = slope;
    for (const auto& term : terms)
      v += term.c * (x < term.u ? -1.0 : (x > term.u ? 1.0 : 0.0));
    return v;
  };
  return {eval, d1, {}, std::move(kinks),
          "kinks:" + std::to_string(terms.size()) + "-term"};
}

/// Default finite-difference step for an interval.
inline double default_fd_step(const Interval& iv) { return 1e-5 * iv.width(); }

/// f''(x) from the analytic second derivative when present, else the
/// central difference (f(x+h) - 2 f(x) + f(x-h)) / h^2.
inline double d2_or_fd(const ConvexFn& f, double x, double h) {
  if (f.d2)
    return f.d2(x);
  if (!(h > 0.0))
    throw ValidationError("d2_or_fd: step must be positive");
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double d1_or_fd(const ConvexFn& f, double x, double h) {
  if (f.d1)
    return f.d1(x);
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Largest value of f((x+y)/2) - (f(x)+f(y))/2 over all pairs of an n-point
/// uniform grid on [a,b]. Convexity within tolerance means this is <= tol.
inline double midpoint_convexity_violation(const ConvexFn& f, const Interval& iv,
                                           std::size_t n = 101) {
  if (n < 2)
    throw ValidationError("midpoint convexity check needs at least two grid points");
  // Midpoints of grid pairs are exactly the points of the half-step grid.
  const std::size_t m = 2 * n - 1;
  std::vector<double> half(m);
  for (std::size_t k = 0; k < m; ++k)
    half[k] = f(iv.a() + iv.width() * static_cast<double>(k) / static_cast<double>(m - 1));
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      worst = std::max(worst, half[i + j] - 0.5 * (half[2 * i] + half[2 * j]));
  return worst;
}

inline bool is_midpoint_convex(const ConvexFn& f, const Interval& iv, double tol,
                               std::size_t n = 101) {
  return midpoint_convexity_violation(f, iv, n) <= tol;
}

/// Largest gap between the chord through (a, f(a)), (b, f(b)) and f on an
/// n-point grid. Zero exactly for affine f.
inline double max_chord_deviation(const ConvexFn& f, const Interval& iv, std::size_t n = 1001) {
  const double fa = f(iv.a());
  const double fb = f(iv.b());
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    const double x = iv.a() + s * iv.width();
    worst = std::max(worst, std::abs((1.0 - s) * fa + s * fb - f(x)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Mollification
// ---------------------------------------------------------------------------

namespace detail {

// Standard bump exp(-1/(1-r^2)) on (-1, 1) and its first two derivatives.
struct Bump {
  static double value(double r) {
    const double q = 1.0 - r * r;
    return q <= 0.0 ? 0.0 : std::exp(-1.0 / q);
  }
  static double d1(double r) {
    const double q = 1.0 - r * r;
    const double k = value(r);
    return k == 0.0 ? 0.0 : k * (-2.0 * r / (q * q));
  }
  static double d2(double r) {
    const double q = 1.0 - r * r;
    if (value(r) == 0.0)
      return 0.0;
    const double g1 = -2.0 * r / (q * q);
    const double g2 = -2.0 / (q * q) - 8.0 * r * r / (q * q * q);
    return value(r) * (g1 * g1 + g2);
  }
};

struct BumpMoments {
  double mass;       // int K
  double abs_first;  // int |r| K / mass
};

inline const BumpMoments& bump_moments() {
  static const BumpMoments moments = [] {
    const QuadConfig cfg{1e-15, 1e-14, 50, 4};
    const double zero = 0.0;
    const double mass = integrate_with_kinks(Bump::value, -1.0, 1.0, {&zero, 1}, cfg).value;
    const double first =
        integrate_with_kinks([](double r) { return std::abs(r) * Bump::value(r); }, -1.0, 1.0,
                             {&zero, 1}, cfg)
            .value;
    return BumpMoments{mass, first / mass};
  }();
  return moments;
}

} // namespace detail

/// Smooth convex approximation of f with sup distance <= eps on [a,b].
///
/// f is continued outside [a,b] by straight lines with its one-sided end
/// slopes (a convex extension), then convolved with a bump of half-width
/// delta = 0.9 eps / (L m1), where L bounds |slope| of the extension and m1
/// is the bump's mean absolute abscissa. Each evaluation is a quadrature
/// split at the shifted kinks of the extension.
inline ConvexFn mollify(const ConvexFn& f, double eps, const Interval& iv) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ValidationError("mollify: eps must be positive");

  const double a = iv.a();
  const double b = iv.b();
  const double h = 1e-7 * iv.width();
  auto end_slope = [&](double x, double fallback) {
    if (f.d1) {
      const double s = f.d1(x);
      if (std::isfinite(s))
        return s;
    }
    return fallback;
  };
  const double fa = f(a);
  const double fb = f(b);
  // One-sided slopes; a kink sitting on an endpoint uses the inward derivative.
  double slope_a = end_slope(a, (f(a + h) - fa) / h);
  double slope_b = end_slope(b, (fb - f(b - h)) / h);
  for (double k : f.kinks) {
    if (k == a)
      slope_a = (f(a + h) - fa) / h;
    if (k == b)
      slope_b = (fb - f(b - h)) / h;
  }

  const double lipschitz = std::max(std::abs(slope_a), std::abs(slope_b));
  if (lipschitz == 0.0)
    return f;  // constant on [a,b]

  const auto& moments = detail::bump_moments();
  const double delta = 0.9 * eps / (lipschitz * moments.abs_first);
  if (delta < 1e-9 * iv.width())
    throw NumericFailure("mollify: kernel width " + std::to_string(delta) +
                         " underflows the interval resolution");

  auto extended = [=](double x) {
    if (x < a)
      return fa + slope_a * (x - a);
    if (x > b)
      return fb + slope_b * (x - b);
    return f(x);
  };

  std::vector<double> ext_kinks = f.kinks;
  ext_kinks.push_back(a);
  ext_kinks.push_back(b);

  const QuadConfig cfg{1e-13, 1e-13, 60, 1};
  const double mass = moments.mass;

  // Integrand in the kernel variable r in (-1, 1); f_ext(x - delta r) has
  // kinks where x - delta r hits an extension kink.
  auto convolve = [=](double x, auto&& weight) {
    std::vector<double> rk;
    rk.reserve(ext_kinks.size() + 1);
    rk.push_back(0.0);
    for (double k : ext_kinks)
      rk.push_back((x - k) / delta);
    return integrate_with_kinks(weight, -1.0, 1.0, rk, cfg).value / mass;
  };

  auto value = [=](double x) {
    return convolve(x, [&](double r) { return extended(x - delta * r) * detail::Bump::value(r); });
  };
  // The kernel derivatives integrate to zero against constants (and K'' also
  // against linear terms), so the local value and secant are subtracted to
  // keep the integrands O(1).
  auto first = [=](double x) {
    const double fx = extended(x);
    return convolve(x, [&](double r) {
             return (extended(x - delta * r) - fx) * detail::Bump::d1(r);
           }) /
           delta;
  };
  auto second = [=](double x) {
    const double fx = extended(x);
    const double secant = (extended(x + delta) - extended(x - delta)) / (2.0 * delta);
    return convolve(x, [&](double r) {
             return (extended(x - delta * r) - fx + secant * delta * r) * detail::Bump::d2(r);
           }) /
           (delta * delta);
  };

  return {value, first, second, {}, "mollify(" + f.label + "," + format_number(eps) + ")"};
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_real(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty() || !std::isfinite(value))
    throw ValidationError(std::string(what) + ": cannot parse number '" + std::string(text) + "'");
  return value;
}

inline std::vector<double> parse_reals(std::string_view text, std::string_view what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    values.push_back(parse_real(text.substr(start, comma - start), what));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return values;
}

} // namespace detail

/// Build a convex function from its registry name:
///   square | exp | negentropy | abs:u | vee:alpha,tau,beta,t | powp:p |
///   affine:slope,intercept
inline ConvexFn function_from_name(std::string_view name, const Interval& iv) {
  const auto colon = name.find(':');
  const std::string_view head = name.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? "" : name.substr(colon + 1);
  auto expect_args = [&](std::size_t count) {
    auto values = detail::parse_reals(args, head);
    if (values.size() != count)
      throw ValidationError(std::string(head) + ": expected " + std::to_string(count) +
                            " parameter(s)");
    return values;
  };

  if (head == "square" && args.empty())
    return make_square();
  if (head == "exp" && args.empty())
    return make_exp();
  if (head == "negentropy" && args.empty()) {
    if (iv.a() < 0.0)
      throw ValidationError("negentropy: requires a >= 0");
    return make_negentropy();
  }
  if (head == "abs" && !args.empty())
    return make_pivot_abs(expect_args(1)[0], iv);
  if (head == "vee" && !args.empty()) {
    auto v = expect_args(4);
    return make_vee({v[0], v[1], v[2], v[3]}, iv);
  }
  if (head == "powp" && !args.empty()) {
    if (iv.a() < 0.0)
      throw ValidationError("powp: requires a >= 0");
    return make_power(expect_args(1)[0]);
  }
  if (head == "affine" && !args.empty()) {
    auto v = expect_args(2);
    return make_affine(v[0], v[1]);
  }
  throw ValidationError("unknown function '" + std::string(name) + "'");
}

} // namespace thh
