#pragma once

#include <span>
#include <vector>

#include "spamlab/equilibrium.hpp"

namespace spamlab {

/// Externality E = c1 * bmax + c2 * gas executed.
struct CostParams {
  double c1 = 0.0;
  double c2 = 1.0;
  void validate() const;
};

struct MetricsReport {
  double w_user = 0.0;
  double revenue = 0.0;
  double externality = 0.0;
  double w_user0 = 0.0;
  double revenue0 = 0.0;
  double externality0 = 0.0;
  double delta_w = 0.0;
  double delta_r = 0.0;
  double delta_e = 0.0;

  double w_plus_r() const { return w_user + revenue; }
  double w_plus_r0() const { return w_user0 + revenue0; }
};

/// Consumer surplus of the first `qu` units of demand when each pays g:
/// integral over [0, qu] of (P(q) - g). Closed form for linear demand,
/// adaptive Simpson otherwise. Throws DomainError when g > P(qu).
double user_welfare(const DemandCurve& demand, double qu, double g,
                    double quadrature_tol = 1e-8);

/// Same integral, always by quadrature. Kept public so the closed form can be
/// checked against it.
double user_welfare_quadrature(const DemandCurve& demand, double qu, double g,
                               double quadrature_tol = 1e-8);

double validator_revenue(double g, double total_gas);

/// Throws ArgumentError when total_gas exceeds bmax.
double externality(const CostParams& costs, double bmax, double total_gas);

MetricsReport report(const MarketParams& p, const CostParams& costs,
                     const SolverConfig& cfg = {});
/// Metrics for an already solved spam-world equilibrium at `p`.
MetricsReport report(const MarketParams& p, const Equilibrium& eq, const CostParams& costs,
                     const SolverConfig& cfg = {});

struct SweepRow {
  double bmax;
  Equilibrium eq;
  MetricsReport metrics;
};

/// One row per grid point, in grid order.
std::vector<SweepRow> sweep_bmax(const MarketParams& templ, const CostParams& costs,
                                 std::span<const double> grid,
                                 const SolverConfig& cfg = {});

/// from, from + step, ..., up to `to` inclusive (with round-off slack).
std::vector<double> make_grid(double from, double to, double step);

}  // namespace spamlab
