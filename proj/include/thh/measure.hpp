#pragma once

/**
 * @file measure.hpp
 * @brief Probability measures on a compact interval [a,b].
 *
 * A Measure is an absolutely continuous part (a density, optionally with a
 * closed-form cumulative mass) plus finitely many atoms. Everything the
 * bounds and Karamata machinery needs reduces to a handful of partial
 * moments of the distribution function G(x) = mu(-inf, x]:
 *
 *   partial_deficit(u)        = int_[a,u] (u - x) dG(x)  = int_a^u G(x) dx
 *   partial_excess(t)         = int_(t,b] (x - t) dG(x)
 *   partial_cdf_integral(l,h) = int_l^h G(x) dx
 *
 * Atom contributions are evaluated as exact finite sums, so a purely atomic
 * measure never touches the quadrature path.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thh/error.hpp"
#include "thh/quad.hpp"

namespace thh {

inline constexpr double mass_tol = 1e-9;

class Interval {
public:
  Interval(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
      std::ostringstream msg;
      msg << "interval requires finite a < b, got [" << a << ", " << b << "]";
      throw ValidationError(msg.str());
    }
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double width() const noexcept { return b_ - a_; }
  double midpoint() const noexcept { return 0.5 * (a_ + b_); }
  bool contains(double x) const noexcept { return a_ <= x && x <= b_; }
  bool contains_open(double x) const noexcept { return a_ < x && x < b_; }

  friend bool operator==(const Interval&, const Interval&) = default;

private:
  double a_;
  double b_;
};

inline const Interval unit_interval{0.0, 1.0};

struct Atom {
  double x;
  double p;
};

/// Closure of the two endpoints of an integration range; decides which
/// atoms sitting exactly on lo or hi are counted.
struct HalfOpenSpec {
  bool lower_closed = true;
  bool upper_closed = true;
};

inline constexpr HalfOpenSpec closed_closed{true, true};
inline constexpr HalfOpenSpec open_closed{false, true};

using RealFn = std::function<double(double)>;

class Measure {
public:
  struct Parts {
    Interval interval = unit_interval;
    RealFn density;         // continuous part, may be empty
    RealFn continuous_cdf;  // closed form of int_a^x density, may be empty
    std::vector<Atom> atoms;
    std::string label;
    QuadConfig quad;
  };

  explicit Measure(Parts parts) : parts_(std::move(parts)) {
    parts_.quad.validate();
    normalize_atoms();
    if (parts_.continuous_cdf && !parts_.density)
      throw ValidationError("measure: a continuous cdf requires a density");
    continuous_mass_ = parts_.density ? continuous_integral([](double) { return 1.0; },
                                                           interval().a(), interval().b())
                                      : 0.0;
    double mass = continuous_mass_;
    for (const auto& atom : parts_.atoms)
      mass += atom.p;
    if (std::abs(mass - 1.0) > mass_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "measure '" << parts_.label << "': total mass " << mass << " differs from 1";
      throw ValidationError(msg.str());
    }
    mean_ = compute_mean();
  }

  const Interval& interval() const noexcept { return parts_.interval; }
  std::span<const Atom> atoms() const noexcept { return parts_.atoms; }
  const std::string& label() const noexcept { return parts_.label; }
  const QuadConfig& quad() const noexcept { return parts_.quad; }
  bool has_density() const noexcept { return static_cast<bool>(parts_.density); }
  bool has_closed_cdf() const noexcept { return static_cast<bool>(parts_.continuous_cdf); }
  bool is_atomic() const noexcept { return !parts_.density; }
  double continuous_mass() const noexcept { return continuous_mass_; }

  /// Copy of this measure evaluated with a different quadrature budget.
  Measure with_quad(const QuadConfig& cfg) const {
    Parts copy = parts_;
    copy.quad = cfg;
    return Measure(std::move(copy));
  }

  Measure with_label(std::string label) const {
    Measure copy = *this;
    copy.parts_.label = std::move(label);
    return copy;
  }

  double density(double x) const {
    if (!parts_.density || !interval().contains(x))
      return 0.0;
    return parts_.density(x);
  }

  /// G(x) = mu(-inf, x]; right-continuous, exactly 0 below a and 1 from b on.
  double cdf(double x) const {
    if (x < interval().a())
      return 0.0;
    if (x >= interval().b())
      return 1.0;
    double value = continuous_cdf(x);
    for (const auto& atom : parts_.atoms) {
      if (atom.x > x)
        break;
      value += atom.p;
    }
    return std::clamp(value, 0.0, 1.0);
  }

  double mean() const noexcept { return mean_; }

  /// int_[a,u] (u - x) dG(x).
  double partial_deficit(double u) const {
    require_inside(u, "partial_deficit");
    double value = continuous_integral([u](double x) { return u - x; }, interval().a(), u);
    for (const auto& atom : parts_.atoms) {
      if (atom.x > u)
        break;
      value += atom.p * (u - atom.x);
    }
    return value;
  }

  /// int_(t,b] (x - t) dG(x). An atom at t is excluded; its weight factor is 0.
  double partial_excess(double t) const {
    require_inside(t, "partial_excess");
    double value = continuous_integral([t](double x) { return x - t; }, t, interval().b());
    for (const auto& atom : parts_.atoms)
      if (atom.x > t)
        value += atom.p * (atom.x - t);
    return value;
  }

  /// int_lo^hi G(x) dx.
  double partial_cdf_integral(double lo, double hi) const {
    require_inside(lo, "partial_cdf_integral");
    require_inside(hi, "partial_cdf_integral");
    if (lo > hi)
      throw ValidationError("partial_cdf_integral: inverted bounds");
    if (lo == hi)
      return 0.0;
    double value = 0.0;
    if (parts_.density) {
      // int_lo^hi Gc = hi Gc(hi) - lo Gc(lo) - int_lo^hi x dGc
      value = hi * continuous_cdf(hi) - lo * continuous_cdf(lo) -
              continuous_integral([](double x) { return x; }, lo, hi);
    }
    for (const auto& atom : parts_.atoms) {
      if (atom.x > hi)
        break;
      value += atom.p * (hi - std::max(lo, atom.x));
    }
    return value;
  }

  /// int over (lo, hi) of f * density, with f's kinks honored.
  template <class F>
  QuadResult continuous_part(F&& f, double lo, double hi, std::span<const double> kinks = {},
                             const QuadConfig* cfg = nullptr) const {
    if (!parts_.density || lo == hi)
      return {};
    auto integrand = [&](double x) { return f(x) * parts_.density(x); };
    return integrate_with_kinks(integrand, lo, hi, kinks, cfg ? *cfg : parts_.quad);
  }

private:
  void normalize_atoms() {
    auto& atoms = parts_.atoms;
    for (const auto& atom : atoms) {
      if (!std::isfinite(atom.x) || !interval().contains(atom.x)) {
        std::ostringstream msg;
        msg << "measure: atom at " << atom.x << " lies outside [" << interval().a() << ", "
            << interval().b() << "]";
        throw ValidationError(msg.str());
      }
      if (!(atom.p > 0.0) || atom.p > 1.0 + mass_tol) {
        std::ostringstream msg;
        msg << "measure: atom weight " << atom.p << " is not in (0, 1]";
        throw ValidationError(msg.str());
      }
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
    for (std::size_t i = 1; i < atoms.size(); ++i)
      if (atoms[i].x == atoms[i - 1].x)
        throw ValidationError("measure: duplicate atom location " + std::to_string(atoms[i].x));
  }

  void require_inside(double x, const char* who) const {
    if (!interval().contains(x)) {
      std::ostringstream msg;
      msg << who << ": argument " << x << " outside [" << interval().a() << ", "
          << interval().b() << "]";
      throw ValidationError(msg.str());
    }
  }

  template <class F>
  double continuous_integral(F&& f, double lo, double hi) const {
    return continuous_part(std::forward<F>(f), lo, hi).value;
  }

  double continuous_cdf(double x) const {
    if (!parts_.density)
      return 0.0;
    if (parts_.continuous_cdf)
      return parts_.continuous_cdf(x);
    return continuous_integral([](double) { return 1.0; }, interval().a(), x);
  }

  double compute_mean() const {
    double value =
        continuous_integral([](double x) { return x; }, interval().a(), interval().b());
    for (const auto& atom : parts_.atoms)
      value += atom.p * atom.x;
    return value;
  }

  Parts parts_;
  double continuous_mass_ = 0.0;
  double mean_ = 0.0;
};

/// int_{lo..hi} f dG with endpoint closure controlled by `spec`; atoms strictly
/// inside are always counted. `kinks` are nondifferentiable points of f.
template <class F>
QuadResult integrate_stieltjes(F&& f, const Measure& m, double lo, double hi,
                               HalfOpenSpec spec = closed_closed,
                               std::span<const double> kinks = {},
                               const QuadConfig* cfg = nullptr) {
  if (!m.interval().contains(lo) || !m.interval().contains(hi) || lo > hi)
    throw ValidationError("integrate_stieltjes: range must satisfy a <= lo <= hi <= b");
  QuadResult result = m.continuous_part(f, lo, hi, kinks, cfg);
  for (const auto& atom : m.atoms()) {
    const bool admitted = (lo < atom.x && atom.x < hi) ||
                          (atom.x == lo && spec.lower_closed) ||
                          (atom.x == hi && spec.upper_closed);
    if (admitted)
      result.value += f(atom.x) * atom.p;
  }
  return result;
}

/// Expectation int_[a,b] f dG over the whole support.
template <class F>
double expectation(F&& f, const Measure& m, std::span<const double> kinks = {}) {
  return integrate_stieltjes(std::forward<F>(f), m, m.interval().a(), m.interval().b(),
                             closed_closed, kinks)
      .value;
}

/// True when all mass sits on at most two points, the configuration under
/// which the three-point bound cannot be strictly tighter than the chord.
inline bool concentrated_on_two_points(const Measure& m) {
  if (m.continuous_mass() > mass_tol)
    return false;
  const auto atoms = m.atoms();
  if (atoms.size() <= 2)
    return true;
  std::vector<double> weights;
  for (const auto& atom : atoms)
    weights.push_back(atom.p);
  std::partial_sort(weights.begin(), weights.begin() + 2, weights.end(), std::greater<>());
  return weights[0] + weights[1] >= 1.0 - mass_tol;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

inline Measure make_uniform(const Interval& iv = unit_interval) {
  const double a = iv.a();
  const double w = iv.width();
  Measure::Parts parts;
  parts.interval = iv;
  parts.density = [w](double) { return 1.0 / w; };
  parts.continuous_cdf = [a, w](double x) { return std::clamp((x - a) / w, 0.0, 1.0); };
  parts.label = "uniform";
  return Measure(std::move(parts));
}

/// Beta(2,2) rescaled to the interval: G(s) = s^2 (3 - 2 s), s = (x-a)/(b-a).
inline Measure make_beta22(const Interval& iv = unit_interval) {
  const double a = iv.a();
  const double w = iv.width();
  Measure::Parts parts;
  parts.interval = iv;
  parts.density = [a, w](double x) {
    const double s = (x - a) / w;
    return 6.0 * s * (1.0 - s) / w;
  };
  parts.continuous_cdf = [a, w](double x) {
    const double s = std::clamp((x - a) / w, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
  };
  parts.label = "beta22";
  return Measure(std::move(parts));
}

inline std::string format_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

/// Exponential(lambda) truncated to the interval and renormalized:
/// G(s) = (1 - e^{-lambda s}) / (1 - e^{-lambda}), s = (x-a)/(b-a).
inline Measure make_trunc_exp(double lambda, const Interval& iv = unit_interval) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("truncexp: lambda must be positive and finite");
  const double a = iv.a();
  const double w = iv.width();
  const double norm = -std::expm1(-lambda);
  Measure::Parts parts;
  parts.interval = iv;
  parts.density = [a, w, lambda, norm](double x) {
    return lambda * std::exp(-lambda * (x - a) / w) / (norm * w);
  };
  parts.continuous_cdf = [a, w, lambda, norm](double x) {
    const double s = std::clamp((x - a) / w, 0.0, 1.0);
    return -std::expm1(-lambda * s) / norm;
  };
  parts.label = "truncexp" + format_number(lambda);
  return Measure(std::move(parts));
}

/// Purely atomic measure. Without an explicit interval the support hull
/// [x_min, x_max] is used, which needs at least two distinct locations.
inline Measure make_discrete(std::vector<Atom> atoms, std::optional<Interval> iv = std::nullopt) {
  if (atoms.empty())
    throw ValidationError("discrete measure needs at least one atom");
  if (!iv) {
    auto [lo, hi] = std::minmax_element(atoms.begin(), atoms.end(),
                                        [](const Atom& l, const Atom& r) { return l.x < r.x; });
    iv.emplace(lo->x, hi->x);
  }
  Measure::Parts parts;
  parts.interval = *iv;
  parts.atoms = std::move(atoms);
  parts.label = "discrete";
  return Measure(std::move(parts));
}

/// Convex combination w * first + (1 - w) * second on a shared interval.
inline Measure make_mixture(const Measure& first, double w, const Measure& second) {
  if (!(w >= 0.0 && w <= 1.0))
    throw ValidationError("mixture weight must lie in [0, 1]");
  if (!(first.interval() == second.interval()))
    throw ValidationError("mixture components must share an interval");

  Measure::Parts parts;
  parts.interval = first.interval();
  parts.quad = first.quad();
  parts.label = "mix(" + first.label() + "," + second.label() + ")";

  const double v = 1.0 - w;
  const bool d1 = first.has_density() && w > 0.0;
  const bool d2 = second.has_density() && v > 0.0;
  if (d1 || d2) {
    parts.density = [first, second, w, v, d1, d2](double x) {
      return (d1 ? w * first.density(x) : 0.0) + (d2 ? v * second.density(x) : 0.0);
    };
    const bool closed = (!d1 || first.has_closed_cdf()) && (!d2 || second.has_closed_cdf());
    if (closed) {
      // cdf minus atom mass at or below x is the continuous part
      auto continuous_only = [](const Measure& m, double x) {
        double atom_mass = 0.0;
        for (const auto& atom : m.atoms())
          if (atom.x <= x)
            atom_mass += atom.p;
        return m.cdf(x) - atom_mass;
      };
      parts.continuous_cdf = [first, second, w, v, d1, d2, continuous_only](double x) {
        return (d1 ? w * continuous_only(first, x) : 0.0) +
               (d2 ? v * continuous_only(second, x) : 0.0);
      };
    }
  }

  std::vector<Atom> atoms;
  if (w > 0.0)
    for (const auto& atom : first.atoms())
      atoms.push_back({atom.x, w * atom.p});
  if (v > 0.0)
    for (const auto& atom : second.atoms()) {
      auto same = std::find_if(atoms.begin(), atoms.end(),
                               [&](const Atom& existing) { return existing.x == atom.x; });
      if (same != atoms.end())
        same->p += v * atom.p;
      else
        atoms.push_back({atom.x, v * atom.p});
    }
  parts.atoms = std::move(atoms);
  return Measure(std::move(parts));
}

} // namespace thh
