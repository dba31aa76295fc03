// Bounds of E[X^2] under Beta(2,2) and the average residuals of the three
// inequalities for the same measure.

#include <cstdio>

#include "thh/thh.hpp"

int main() {
  const thh::Measure m = thh::make_beta22();
  const thh::ConvexFn f = thh::make_square();

  const auto r = thh::all_bounds(m, f, 0.5);
  std::printf("%.6f <= E f(X) = %.6f <= %.6f (three-point) <= %.6f (chord)\n", r.jensen_lower,
              r.integral, r.th_upper, r.h_upper);

  const auto best = thh::optimal_pivot(m, f);
  std::printf("best pivot t* = %.6f, residual gain over the chord %.6f\n", best.t_star,
              -best.d_star);

  for (auto kind : {thh::Kind::jensen, thh::Kind::chord, thh::Kind::three_point}) {
    const auto spec = thh::InequalitySpec::make(kind, m);
    std::printf("AR(%s) = %.6f\n", thh::kind_name(kind).c_str(), thh::average_residual(spec));
  }
}
