#pragma once

/**
 * @file quad.hpp
 * @brief Globally adaptive Gauss-Kronrod (7/15) quadrature.
 *
 * Panels are kept in a max-heap keyed on their error estimate; the worst
 * panel is bisected until the summed estimate drops below
 * max(abs_tol, rel_tol * |value|). The per-panel estimate is the plain
 * difference |K15 - G7|, which overstates the true error of the Kronrod
 * value for smooth integrands by many orders of magnitude.
 *
 * Integrands built by this library carry their nondifferentiable points
 * explicitly, so integrate_with_kinks() splits there and no kink detection
 * is attempted.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "thh/error.hpp"

namespace thh {

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 40;
  int initial_panels = 1;

  void validate() const {
    if (!(abs_tol > 0.0))
      throw ValidationError("QuadConfig: abs_tol must be positive");
    if (!(rel_tol >= 0.0))
      throw ValidationError("QuadConfig: rel_tol must be nonnegative");
    if (max_depth < 1)
      throw ValidationError("QuadConfig: max_depth must be at least 1");
    if (initial_panels < 1)
      throw ValidationError("QuadConfig: initial_panels must be at least 1");
  }
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int panels_used = 0;

  QuadResult& operator+=(const QuadResult& other) {
    value += other.value;
    error_estimate += other.error_estimate;
    panels_used += other.panels_used;
    return *this;
  }
};

namespace detail {

// Kronrod abscissae on [0,1); index 1,3,5,7 are the Gauss-Legendre nodes.
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  int depth;

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_panel(F& f, double lo, double hi, int depth) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  const double f_center = f(center);
  double kronrod = kronrod_weights[7] * f_center;
  double gauss = gauss_weights[3] * f_center;
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kronrod_nodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kronrod_weights[i] * pair;
    if (i % 2 == 1)
      gauss += gauss_weights[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;

  if (!std::isfinite(kronrod))
    throw NumericFailure("integrand is not finite on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  return {lo, hi, kronrod, std::abs(kronrod - gauss), depth};
}

inline double tolerance_for(const QuadConfig& cfg, double value) {
  return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
}

} // namespace detail

/// Integrate f over [lo, hi].
template <class F>
QuadResult integrate(F&& f, double lo, double hi, const QuadConfig& cfg = {}) {
  cfg.validate();
  if (!(lo <= hi))
    throw ValidationError("integrate: inverted bounds");
  if (lo == hi)
    return {};

  constexpr std::size_t max_panels = 200000;

  std::priority_queue<detail::Panel> heap;
  double value = 0.0;
  double error = 0.0;
  const double width = (hi - lo) / cfg.initial_panels;
  for (int i = 0; i < cfg.initial_panels; ++i) {
    const double p_lo = lo + i * width;
    const double p_hi = (i + 1 == cfg.initial_panels) ? hi : lo + (i + 1) * width;
    auto panel = detail::gauss_kronrod_panel(f, p_lo, p_hi, 0);
    value += panel.value;
    error += panel.error;
    heap.push(panel);
  }

  while (error > detail::tolerance_for(cfg, value)) {
    const detail::Panel worst = heap.top();
    if (worst.depth >= cfg.max_depth || heap.size() >= max_panels) {
      throw NumericFailure("integrate: no convergence on [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "] (estimate " + std::to_string(error) + ")",
                           value, error);
    }
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    // Panel width hit floating-point resolution; nothing left to bisect.
    if (!(worst.lo < mid && mid < worst.hi))
      throw NumericFailure("integrate: panel collapsed at " + std::to_string(mid), value, error);
    auto left = detail::gauss_kronrod_panel(f, worst.lo, mid, worst.depth + 1);
    auto right = detail::gauss_kronrod_panel(f, mid, worst.hi, worst.depth + 1);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift of the running updates.
  QuadResult result;
  result.panels_used = static_cast<int>(heap.size());
  std::vector<detail::Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const detail::Panel& x, const detail::Panel& y) { return x.lo < y.lo; });
  for (const auto& p : panels) {
    result.value += p.value;
    result.error_estimate += p.error;
  }
  return result;
}

/// Integrate f over [lo, hi] panel-by-panel between the given kinks.
/// Kinks outside the open interval (lo, hi) are ignored; the list need not
/// be sorted or unique.
template <class F>
QuadResult integrate_with_kinks(F&& f, double lo, double hi, std::span<const double> kinks,
                                const QuadConfig& cfg = {}) {
  if (!(lo <= hi))
    throw ValidationError("integrate_with_kinks: inverted bounds");
  if (lo == hi)
    return {};

  std::vector<double> breaks;
  breaks.reserve(kinks.size() + 2);
  breaks.push_back(lo);
  for (double k : kinks)
    if (lo < k && k < hi)
      breaks.push_back(k);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const double total = hi - lo;
  QuadResult result;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    QuadConfig piece = cfg;
    piece.abs_tol = std::max(cfg.abs_tol * (breaks[i + 1] - breaks[i]) / total,
                             cfg.abs_tol * 1e-6);
    result += integrate(f, breaks[i], breaks[i + 1], piece);
  }
  return result;
}

} // namespace thh
