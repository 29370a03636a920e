#include "fw/frank_wolfe.hpp"

namespace fw {

double bisect_derivative(const std::function<double(double)>& slope) {
  const double d0 = slope(0.0);
  require_finite(d0, "line-search derivative");
  if (d0 >= 0.0) return 0.0;
  const double d1 = slope(1.0);
  require_finite(d1, "line-search derivative");
  if (d1 <= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = slope(mid);
    require_finite(d, "line-search derivative");
    if (std::abs(d) <= 1e-10) return mid;
    (d < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double guarded_line_search(const std::function<double(double)>& phi,
                           const std::function<double(double)>& slope, int k) {
  double best = bisect_derivative(slope);
  double best_val = phi(best);
  require_finite(best_val, "line-search objective");
  for (double a : {0.0, 2.0 / (k + 2.0), 1.0}) {
    const double v = phi(a);
    require_finite(v, "line-search objective");
    if (v < best_val) {
      best = a;
      best_val = v;
    }
  }
  return best;
}

}  // namespace fw
