#include "spamlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "spamlab/errors.hpp"

namespace spamlab {

void CostParams::validate() const {
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) {
    throw ArgumentError("costs: c1 and c2 must be nonnegative");
  }
}

namespace {

void check_welfare_inputs(const DemandCurve& demand, double qu, double g) {
  if (!(qu >= 0.0)) throw DomainError("user_welfare: quantity must be nonnegative");
  const double top = demand.intercept();
  if (qu > top * (1.0 + 1e-12)) {
    throw DomainError("user_welfare: quantity exceeds D(0)");
  }
  if (qu > 0.0) {
    const double p = demand.inverse(std::min(qu, top));
    if (g > p + 1e-9 * std::max(1.0, std::abs(p))) {
      throw DomainError("user_welfare: price above the marginal user's valuation");
    }
  }
}

}  // namespace

double user_welfare_quadrature(const DemandCurve& demand, double qu, double g,
                               double quadrature_tol) {
  check_welfare_inputs(demand, qu, g);
  if (qu == 0.0) return 0.0;
  qu = std::min(qu, demand.intercept());
  const double p_qu = demand.inverse(qu);
  const double choke = demand.choke_price();
  if (std::isfinite(choke)) {
    const double scale = std::max(1.0, qu * std::max(choke, std::abs(g)));
    return adaptive_simpson([&](double q) { return demand.inverse(q) - g; }, 0.0, qu,
                            quadrature_tol * scale);
  }
  // Unbounded inverse demand near q = 0: integrate in price instead,
  // surplus = integral of D(p) over [P(qu), inf) + qu (P(qu) - g).
  double hi = std::max(1.0, 2.0 * p_qu);
  const double floor = 1e-16 * demand.intercept();
  for (int i = 0; i < 200 && demand.eval(hi) > floor; ++i) hi *= 2.0;
  if (demand.eval(hi) > floor) {
    throw DomainError("user_welfare: demand has a positive asymptote, surplus is unbounded");
  }
  const double scale = std::max(1.0, qu * std::max(p_qu, std::abs(g)));
  const double tail = adaptive_simpson([&](double p) { return demand.eval(p); }, p_qu, hi,
                                       quadrature_tol * scale);
  return tail + qu * (p_qu - g);
}

double user_welfare(const DemandCurve& demand, double qu, double g, double quadrature_tol) {
  check_welfare_inputs(demand, qu, g);
  if (qu == 0.0) return 0.0;
  if (const auto* lin = demand.as_linear()) {
    // qu (d0/beta - g) - qu^2 / (2 beta); equals qu^2 / (2 beta) at g = P(qu).
    return qu * (lin->d0 / lin->beta - g) - qu * qu / (2.0 * lin->beta);
  }
  if (const auto* ex = demand.as_exponential()) {
    // integral of ln(d0/q)/lambda over [0, qu] = qu (1 + ln(d0/qu)) / lambda
    return qu * (1.0 + std::log(ex->d0 / qu)) / ex->lambda - g * qu;
  }
  return user_welfare_quadrature(demand, qu, g, quadrature_tol);
}

double validator_revenue(double g, double total_gas) {
  if (!(g >= 0.0) || !(total_gas >= 0.0)) {
    throw ArgumentError("validator_revenue: price and gas must be nonnegative");
  }
  return g * total_gas;
}

double externality(const CostParams& costs, double bmax, double total_gas) {
  if (total_gas > bmax * (1.0 + 1e-12)) {
    throw ArgumentError("externality: executed gas exceeds block capacity");
  }
  return costs.c1 * bmax + costs.c2 * total_gas;
}

MetricsReport report(const MarketParams& p, const CostParams& costs, const SolverConfig& cfg) {
  return report(p, solve(p, cfg), costs, cfg);
}

MetricsReport report(const MarketParams& p, const Equilibrium& eq, const CostParams& costs,
                     const SolverConfig& cfg) {
  costs.validate();
  const Counterfactual cf = counterfactual(p);
  MetricsReport m;
  m.w_user = user_welfare(p.demand, eq.user_gas, eq.clearing_price, cfg.quadrature_tol);
  m.revenue = validator_revenue(eq.clearing_price, eq.total_gas);
  m.externality = externality(costs, p.bmax, std::min(eq.total_gas, p.bmax));
  m.w_user0 = user_welfare(p.demand, cf.qu0, cf.g0, cfg.quadrature_tol);
  m.revenue0 = validator_revenue(cf.g0, cf.qu0);
  m.externality0 = externality(costs, p.bmax, cf.qu0);
  m.delta_w = m.w_user - m.w_user0;
  m.delta_r = m.revenue - m.revenue0;
  m.delta_e = m.externality - m.externality0;
  return m;
}

std::vector<SweepRow> sweep_bmax(const MarketParams& templ, const CostParams& costs,
                                 std::span<const double> grid, const SolverConfig& cfg) {
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double b : grid) {
    const MarketParams p = templ.with_bmax(b);
    const Equilibrium eq = solve(p, cfg);
    rows.push_back({b, eq, report(p, eq, costs, cfg)});
  }
  return rows;
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) {
    throw ArgumentError("grid: need step > 0 and to >= from");
  }
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(from + step * static_cast<double>(i));
  }
  return grid;
}

}  // namespace spamlab
