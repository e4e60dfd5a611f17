#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace spamlab {

/// Tolerances and iteration budgets shared by every solver in the library.
struct SolverConfig {
  double root_tol = 1e-9;          // absolute, in spam units
  std::size_t scan_points = 64;    // grid used to bracket the first sign change
  std::size_t max_bisection_iterations = 200;
  double fixed_point_tol = 1e-8;   // relative, on the block clearing price
  std::size_t max_outer_iterations = 500;
  double damping = 0.5;
  double quadrature_tol = 1e-8;    // relative to the integrand scale
};

using ScalarFn = std::function<double(double)>;

/// Bisection on [lo, hi] where f(lo) > 0 >= f(hi). The caller guarantees the
/// bracket; f(lo) itself is never evaluated, which lets lo sit on a removable
/// zero such as u(0) = 0.
double bisect_down_crossing(const ScalarFn& f, double lo, double hi, double tol,
                            std::size_t max_iter);

/// Bisection for a sign change of f on [lo, hi] with f(lo) and f(hi) of
/// opposite sign (either orientation). Throws ConvergenceError otherwise.
double bisect_root(const ScalarFn& f, double lo, double hi, double tol,
                   std::size_t max_iter);

/// Scans f on `points` equally spaced nodes of (lo, hi] and returns the first
/// bracket [a, b] where f switches from positive to nonpositive. `positive_at_lo`
/// supplies the sign just to the right of lo (f(lo) may be a removable zero).
struct DownCrossing {
  double lo;
  double hi;
};
struct ScanResult {
  std::optional<DownCrossing> crossing;
  bool positive_at_hi = false;  // f stays positive through hi: corner solution
  bool ever_positive = false;
};
ScanResult scan_down_crossing(const ScalarFn& f, double lo, double hi,
                              std::size_t points, bool positive_at_lo);

/// Adaptive Simpson quadrature with absolute tolerance `abs_tol`.
double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol,
                        int max_depth = 50);

}  // namespace spamlab
