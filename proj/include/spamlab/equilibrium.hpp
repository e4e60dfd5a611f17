#pragma once

#include <optional>
#include <string_view>

#include "spamlab/market.hpp"
#include "spamlab/numeric.hpp"

namespace spamlab {

enum class Regime { NoEntry, SlackAtFloor, Congested };

std::string_view regime_name(Regime r);

/// Competitive spam equilibrium under random ordering.
struct Equilibrium {
  Regime regime = Regime::NoEntry;
  double spam_count = 0.0;      // continuous S*
  double clearing_price = 0.0;  // g*
  double user_gas = 0.0;        // Q_u*
  double spam_gas = 0.0;        // s * S*
  double total_gas = 0.0;       // G* = Q_u* + s * S*
  double opportunity = 0.0;     // r at Q_u*
};

/// Spam-free world at the same parameters.
struct Counterfactual {
  double g0;
  double qu0;
};

/// S / (S + 1): chance that at least one of S spam transactions executes
/// after the opportunity when all S + 1 relative positions are equally likely.
double claim_probability(double spam_count);

/// max{gmin, P(bmax - s S)}. Throws InfeasibleSpamError when s S > bmax.
double clearing_price_given_spam(const MarketParams& p, double spam_count);

/// Q_u(S) = min{D(g(S)), bmax - s S}.
double user_gas_given_spam(const MarketParams& p, double spam_count);

/// u(S) = S/(S+1) r(S) - S s g(S): aggregate expected spam profit.
double spam_utility(const MarketParams& p, double spam_count);

/// u(S)/S, the profit of a single spam transaction, continuous at S = 0.
double spam_margin(const MarketParams& p, double spam_count);

Counterfactual counterfactual(const MarketParams& p);

/// Smallest capacity at which the clearing price stays at the floor:
/// D(gmin) + (r(D(gmin)) / gmin - s)_+. Throws DomainError for gmin = 0.
double b_plat(const MarketParams& p);

/// Capacity below which spam never enters (r(Q_u0) <= s g0 there).
double entry_boundary(const MarketParams& p);

/// Closed-form three-regime solution for linear demand; empty otherwise.
std::optional<Equilibrium> solve_closed_form(const MarketParams& p);

/// Zero-profit solve for any demand curve: scan u(S)/S on (0, bmax/s] for the
/// first sign change, then bisect.
Equilibrium solve_numeric(const MarketParams& p, const SolverConfig& cfg = {});

/// Numeric solve; for linear demand also evaluates the closed form, returns
/// it, and throws ConvergenceError if the two disagree by more than 1e-6.
Equilibrium solve(const MarketParams& p, const SolverConfig& cfg = {});

}  // namespace spamlab
