#pragma once

#include <algorithm>
#include <cmath>

namespace spamlab::testing {

// Stand-alone linear-demand model used as an oracle: dense scan of the
// per-spam margin followed by plain bisection.
struct LinearModel {
  double d0, beta, s, r0, gmin, bmax;

  double price(double S) const { return std::max(gmin, (d0 - (bmax - s * S)) / beta); }
  double users(double S) const { return std::min(std::max(0.0, d0 - beta * price(S)), bmax - s * S); }
  double margin(double S) const {
    return r0 * users(S) / d0 / (S + 1.0) - s * price(S);
  }
  double spam() const {
    const double top = bmax / s;
    if (margin(1e-12) <= 0.0) return 0.0;
    double lo = 1e-12, hi = top;
    const int grid = 20000;
    for (int j = 1; j <= grid; ++j) {
      const double x = top * j / grid;
      if (margin(x) <= 0.0) {
        hi = x;
        break;
      }
      lo = x;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double user_gas() const { return users(spam()); }
};

inline LinearModel reference_model(double bmax) { return {1200, 6, 20, 6000, 20, bmax}; }

}  // namespace spamlab::testing
