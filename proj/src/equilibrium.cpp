#include "spamlab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spamlab/errors.hpp"

namespace spamlab {

void MarketParams::validate() const {
  if (!(s > 0.0)) throw ArgumentError("market: s must be positive");
  if (!(r0 >= 0.0)) throw ArgumentError("market: r0 must be nonnegative");
  if (!(gmin >= 0.0)) throw ArgumentError("market: gmin must be nonnegative");
  if (!(bmax > 0.0)) throw ArgumentError("market: bmax must be positive");
  if (opportunity_reference && !(*opportunity_reference > 0.0)) {
    throw ArgumentError("market: opportunity reference must be positive");
  }
}

MarketParams reference_market(double bmax) {
  return MarketParams{DemandCurve::linear(1200.0, 6.0), 20.0, 6000.0, 20.0, bmax,
                      std::nullopt};
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::NoEntry:
      return "no_entry";
    case Regime::SlackAtFloor:
      return "slack_at_floor";
    case Regime::Congested:
      return "congested";
  }
  return "unknown";
}

double claim_probability(double spam_count) {
  if (!(spam_count >= 0.0)) {
    throw ArgumentError("claim_probability: spam count must be nonnegative");
  }
  return spam_count / (spam_count + 1.0);
}

namespace {

double remaining_user_space(const MarketParams& p, double spam_count) {
  if (!(spam_count >= 0.0)) {
    throw ArgumentError("spam count must be nonnegative");
  }
  const double spam_gas = p.s * spam_count;
  if (spam_gas > p.bmax * (1.0 + 1e-12)) {
    throw InfeasibleSpamError("spam gas " + std::to_string(spam_gas) +
                              " exceeds block capacity " + std::to_string(p.bmax));
  }
  return std::max(0.0, p.bmax - spam_gas);
}

}  // namespace

double clearing_price_given_spam(const MarketParams& p, double spam_count) {
  const double space = remaining_user_space(p, spam_count);
  const double q = std::min(space, p.demand.intercept());
  return std::max(p.gmin, p.demand.inverse(q));
}

double user_gas_given_spam(const MarketParams& p, double spam_count) {
  const double g = clearing_price_given_spam(p, spam_count);
  return std::min(p.demand.eval(g), remaining_user_space(p, spam_count));
}

double spam_utility(const MarketParams& p, double spam_count) {
  if (spam_count == 0.0) return 0.0;
  return spam_count * spam_margin(p, spam_count);
}

double spam_margin(const MarketParams& p, double spam_count) {
  const double g = clearing_price_given_spam(p, spam_count);
  const double q = std::min(p.demand.eval(g), remaining_user_space(p, spam_count));
  return p.opportunity(q) / (spam_count + 1.0) - p.s * g;
}

Counterfactual counterfactual(const MarketParams& p) {
  const double top = p.demand.intercept();
  const double g0 = std::max(p.gmin, p.demand.inverse(std::min(p.bmax, top)));
  const double qu0 = std::min(p.bmax, p.demand.eval(p.gmin));
  return {g0, qu0};
}

double b_plat(const MarketParams& p) {
  if (!(p.gmin > 0.0)) {
    throw DomainError("b_plat: unbounded plateau, spam diverges at gmin = 0");
  }
  const double dg = p.demand.eval(p.gmin);
  return dg + std::max(0.0, p.opportunity(dg) / p.gmin - p.s);
}

double entry_boundary(const MarketParams& p) {
  const double k = p.opportunity_rate();
  const double top = p.demand.intercept();
  const double dmin = p.demand.eval(p.gmin);
  auto margin0 = [&](double b) {
    const double qu0 = std::min(b, dmin);
    const double g0 = std::max(p.gmin, p.demand.inverse(std::min(b, top)));
    return k * qu0 - p.s * g0;
  };
  if (margin0(dmin) <= 0.0) return std::numeric_limits<double>::infinity();
  if (auto lin = p.demand.as_linear(); lin && p.gmin < lin->d0 / lin->beta) {
    // k b = s P(b) on the congested branch.
    const double b = p.s * lin->d0 / (lin->beta * k + p.s);
    if (p.demand.inverse(std::min(b, top)) >= p.gmin) return b;
    return p.s * p.gmin / k;
  }
  return bisect_root(margin0, 0.0, dmin, 1e-12 * std::max(1.0, dmin), 400);
}

namespace {

Equilibrium make_equilibrium(const MarketParams& p, Regime regime, double spam,
                             double price, double user_gas) {
  Equilibrium eq;
  eq.regime = regime;
  eq.spam_count = spam;
  eq.clearing_price = price;
  eq.user_gas = user_gas;
  eq.spam_gas = p.s * spam;
  eq.total_gas = user_gas + eq.spam_gas;
  eq.opportunity = p.opportunity(user_gas);
  return eq;
}

bool at_plateau(const MarketParams& p) { return p.gmin > 0.0 && p.bmax >= b_plat(p); }

}  // namespace

std::optional<Equilibrium> solve_closed_form(const MarketParams& p) {
  p.validate();
  const auto* lin = p.demand.as_linear();
  if (!lin) return std::nullopt;
  const double k = p.opportunity_rate();
  const auto cf = counterfactual(p);
  if (k * cf.qu0 <= p.s * cf.g0) {
    return make_equilibrium(p, Regime::NoEntry, 0.0, cf.g0, cf.qu0);
  }
  if (at_plateau(p)) {
    const double dmin = p.demand.eval(p.gmin);
    const double spam = k * dmin / (p.s * p.gmin) - 1.0;
    return make_equilibrium(p, Regime::SlackAtFloor, spam, p.gmin, dmin);
  }
  // Full block, price above the floor:
  //   s S^2 + (delta + s + beta k) S + delta - beta k bmax / s = 0.
  const double beta = lin->beta;
  const double delta = lin->d0 - p.bmax;
  const double b = delta + p.s + beta * k;
  const double disc = b * b - 4.0 * p.s * delta + 4.0 * beta * k * p.bmax;
  const double spam = (std::sqrt(disc) - b) / (2.0 * p.s);
  const double user = p.bmax - p.s * spam;
  const double price = std::max(p.gmin, (lin->d0 - user) / beta);
  return make_equilibrium(p, Regime::Congested, spam, price, user);
}

Equilibrium solve_numeric(const MarketParams& p, const SolverConfig& cfg) {
  p.validate();
  const auto cf = counterfactual(p);
  if (spam_margin(p, 0.0) <= 0.0) {
    return make_equilibrium(p, Regime::NoEntry, 0.0, cf.g0, cf.qu0);
  }
  const double smax = p.bmax / p.s;
  auto margin = [&p](double spam) { return spam_margin(p, spam); };
  const auto scan = scan_down_crossing(margin, 0.0, smax, cfg.scan_points, true);
  double spam = smax;
  if (scan.crossing) {
    spam = bisect_down_crossing(margin, scan.crossing->lo, scan.crossing->hi,
                                cfg.root_tol, cfg.max_bisection_iterations);
  } else if (!scan.positive_at_hi) {
    throw ConvergenceError("solve_numeric: no zero-profit bracket found");
  }
  const Regime regime = at_plateau(p) ? Regime::SlackAtFloor : Regime::Congested;
  return make_equilibrium(p, regime, spam, clearing_price_given_spam(p, spam),
                          user_gas_given_spam(p, spam));
}

Equilibrium solve(const MarketParams& p, const SolverConfig& cfg) {
  const Equilibrium numeric = solve_numeric(p, cfg);
  const auto closed = solve_closed_form(p);
  if (!closed) return numeric;
  const double tol = 1e-6 * std::max(1.0, closed->spam_count);
  if (closed->regime != numeric.regime ||
      std::abs(closed->spam_count - numeric.spam_count) > tol) {
    throw ConvergenceError("solve: closed form S*=" + std::to_string(closed->spam_count) +
                           " disagrees with bisection S*=" +
                           std::to_string(numeric.spam_count));
  }
  return *closed;
}

}  // namespace spamlab
