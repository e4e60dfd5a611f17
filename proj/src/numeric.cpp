#include "spamlab/numeric.hpp"

#include <cmath>

#include "spamlab/errors.hpp"

namespace spamlab {

double bisect_down_crossing(const ScalarFn& f, double lo, double hi, double tol,
                            std::size_t max_iter) {
  for (std::size_t it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double bisect_root(const ScalarFn& f, double lo, double hi, double tol,
                   std::size_t max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw ConvergenceError("bisect_root: no sign change on bracket");
  }
  for (std::size_t it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ScanResult scan_down_crossing(const ScalarFn& f, double lo, double hi,
                              std::size_t points, bool positive_at_lo) {
  ScanResult out;
  out.ever_positive = positive_at_lo;
  bool prev_positive = positive_at_lo;
  double prev_x = lo;
  if (points == 0) points = 1;
  const double step = (hi - lo) / static_cast<double>(points);
  for (std::size_t j = 1; j <= points; ++j) {
    const double x = j == points ? hi : lo + step * static_cast<double>(j);
    const bool positive = f(x) > 0.0;
    if (prev_positive && !positive) {
      out.crossing = DownCrossing{prev_x, x};
      return out;
    }
    if (positive) out.ever_positive = true;
    prev_positive = positive;
    prev_x = x;
  }
  out.positive_at_hi = prev_positive;
  return out;
}

namespace {

double simpson_step(const ScalarFn& f, double a, double b, double fa, double fm,
                    double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

}  // namespace spamlab
