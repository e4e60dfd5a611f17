#include "spamlab/design_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spamlab/errors.hpp"

namespace spamlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double plateau_or_inf(const MarketParams& p) { return p.gmin > 0.0 ? b_plat(p) : kInf; }

// Upper end of a price bracket on which D is still positive somewhere.
double price_ceiling(const DemandCurve& d) {
  const double choke = d.choke_price();
  if (std::isfinite(choke)) return choke;
  double hi = 1.0;
  for (int i = 0; i < 200 && d.eval(hi) > 1e-300; ++i) hi *= 2.0;
  return hi;
}

}  // namespace

double marginal_user_share_closed_form(const MarketParams& p) {
  const auto* lin = p.demand.as_linear();
  if (!lin) throw ArgumentError("closed-form marginal share needs linear demand");
  const double k = p.opportunity_rate();
  const double x = p.bmax - lin->d0 + p.s + lin->beta * k;
  return 0.5 * (1.0 - x / std::sqrt(x * x + 4.0 * lin->beta * k * lin->d0));
}

double marginal_user_share_fd(const MarketParams& p, double rel_step, const SolverConfig& cfg) {
  const double h = rel_step * p.bmax;
  const double up = solve(p.with_bmax(p.bmax + h), cfg).user_gas;
  const double down = solve(p.with_bmax(p.bmax - h), cfg).user_gas;
  return (up - down) / (2.0 * h);
}

double marginal_user_share(const MarketParams& p, const SolverConfig& cfg) {
  const double plateau = plateau_or_inf(p);
  if (p.bmax > plateau) return 0.0;
  const Equilibrium eq = solve(p, cfg);
  if (eq.regime == Regime::NoEntry) return 1.0;
  if (p.demand.is_linear()) return marginal_user_share_closed_form(p);
  if (p.bmax == plateau) {
    // One-sided difference from the congested side.
    const double h = 1e-3 * p.bmax;
    return (eq.user_gas - solve(p.with_bmax(p.bmax - h), cfg).user_gas) / h;
  }
  return marginal_user_share_fd(p, 1e-3, cfg);
}

MmusChoice choose_bmax_mmus(const MarketParams& templ, double eta, const SolverConfig& cfg) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("MMUS target eta must be in (0, 1]");
  if (!(templ.gmin > 0.0)) throw DomainError("MMUS rule needs gmin > 0 (finite plateau)");
  const double hi = b_plat(templ);
  const double lo = std::min(entry_boundary(templ), hi);
  if (lo >= hi) return {hi, false};

  auto share = [&](double b) { return marginal_user_share(templ.with_bmax(b), cfg); };
  if (eta <= share(hi)) return {hi, false};
  const double lo_plus = lo + 1e-9 * std::max(1.0, lo);
  if (eta > share(lo_plus)) return {lo, false};

  // Decreasing share is guaranteed where the curvature condition holds at g*.
  bool monotone = true;
  constexpr int kChecks = 64;
  for (int j = 1; j < kChecks && monotone; ++j) {
    const double b = lo + (hi - lo) * j / kChecks;
    const Equilibrium eq = solve(templ.with_bmax(b), cfg);
    if (eq.regime == Regime::Congested && mmus_condition(templ.demand, eq.clearing_price) >= 0.0) {
      monotone = false;
    }
  }
  const double tol = 1e-9 * std::max(1.0, hi);
  auto excess = [&](double b) { return share(b) - eta; };
  auto above = [&](double b) { return excess(b) >= 0.0 ? 1.0 : -1.0; };
  if (monotone) {
    return {bisect_down_crossing(above, lo_plus, hi, tol, 400), false};
  }
  // Non-monotone share: take the last grid node still meeting the target.
  constexpr int kGrid = 2000;
  double last_ok = lo_plus;
  double next = hi;
  for (int j = 1; j <= kGrid; ++j) {
    const double b = lo_plus + (hi - lo_plus) * j / kGrid;
    if (excess(b) >= 0.0) {
      last_ok = b;
      next = j < kGrid ? lo_plus + (hi - lo_plus) * (j + 1) / kGrid : hi;
    }
  }
  if (last_ok >= hi) return {hi, true};
  return {bisect_down_crossing(above, last_ok, next, tol, 400), true};
}

double entry_threshold_price(const MarketParams& p) {
  const double k = p.opportunity_rate();
  if (const auto* lin = p.demand.as_linear()) {
    return k * lin->d0 / (p.s + lin->beta * k);
  }
  auto gap = [&](double g) { return k * p.demand.eval(g) - p.s * g; };
  return bisect_root(gap, 0.0, price_ceiling(p.demand), 1e-13, 400);
}

double choose_gmin_baseline(const MarketParams& templ, double bmax) {
  if (!(bmax > 0.0)) throw DomainError("baseline floor: bmax must be positive");
  auto plateau_at = [&](double g) { return b_plat(templ.with_gmin(g)); };

  // Bisection on B_plat(g) - bmax, strictly decreasing from +inf at g -> 0.
  const double ceiling = price_ceiling(templ.demand);
  double lo = ceiling;
  for (int i = 0; i < 2000 && plateau_at(lo) <= bmax; ++i) lo *= 0.5;
  if (plateau_at(lo) <= bmax) throw DomainError("baseline floor: bmax unreachable");
  double hi = ceiling;
  if (plateau_at(hi) > bmax) throw DomainError("baseline floor: bmax unreachable");
  const double numeric = bisect_root([&](double g) { return plateau_at(g) - bmax; }, lo, hi,
                                     1e-14 * ceiling, 400);

  const auto* lin = templ.demand.as_linear();
  if (!lin) return numeric;
  const double k = templ.opportunity_rate();
  double closed = (lin->d0 - bmax) / lin->beta;
  if (!(closed >= entry_threshold_price(templ))) {
    const double x = bmax - lin->d0 + templ.s + lin->beta * k;
    closed = (-x + std::sqrt(x * x + 4.0 * lin->beta * k * lin->d0)) / (2.0 * lin->beta);
  }
  if (std::abs(closed - numeric) > 1e-6 * std::max(1.0, closed)) {
    throw ConvergenceError("baseline floor: closed form " + std::to_string(closed) +
                           " disagrees with bisection " + std::to_string(numeric));
  }
  return closed;
}

std::optional<double> mu_user(const MarketParams& p, const SolverConfig& cfg) {
  const Equilibrium eq = solve(p, cfg);
  const double g = p.gmin;
  if (eq.regime == Regime::NoEntry) {
    const double top = p.demand.intercept();
    if (g >= p.demand.inverse(std::min(p.bmax, top))) return 1.0;
    return std::nullopt;
  }
  if (eq.regime == Regime::Congested) return std::nullopt;
  // Slack with spam: Q_u = D(g), s S = k D(g) / g - s.
  const double k = p.opportunity_rate();
  const double d = p.demand.eval(g);
  const double d1 = p.demand.derivative(g, 1);
  const double user_rate = -d1;
  const double spam_rate = k * (d - g * d1) / (g * g);
  return user_rate / (user_rate + spam_rate);
}

RefinedFloor choose_gmin_refined(const MarketParams& templ, double bmax, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("refined floor: eta must be in (0, 1]");
  const double baseline = choose_gmin_baseline(templ, bmax);
  const double entry = entry_threshold_price(templ);
  if (eta == 1.0) return {std::max(baseline, entry), true};

  const double k = templ.opportunity_rate();
  double share_floor;
  if (const auto* lin = templ.demand.as_linear()) {
    share_floor = std::sqrt(eta * k * lin->d0 / (lin->beta * (1.0 - eta)));
  } else {
    // Smallest floor in the slack region whose user share reaches eta.
    auto slack_share = [&](double g) {
      const double d = templ.demand.eval(g);
      const double d1 = templ.demand.derivative(g, 1);
      return -d1 / (-d1 + k * (d - g * d1) / (g * g)) - eta;
    };
    const double lo = 1e-12 * std::max(1.0, entry);
    share_floor = slack_share(entry) < 0.0 ? entry
                                           : bisect_root(slack_share, lo, entry, 1e-13, 400);
  }
  return {std::max(baseline, std::min(entry, share_floor)), false};
}

}  // namespace spamlab
