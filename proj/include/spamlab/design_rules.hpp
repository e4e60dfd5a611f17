#pragma once

#include <optional>

#include "spamlab/equilibrium.hpp"

namespace spamlab {

/// dQ_u*/dbmax: share of the next unit of capacity that goes to users.
/// 1 where spam never enters, 0 past the plateau, and the interior (left)
/// limit exactly at B_plat.
double marginal_user_share(const MarketParams& p, const SolverConfig& cfg = {});

/// Congested-regime closed form for linear demand,
/// (1 - x / sqrt(x^2 + 4 beta r_ref)) / 2 with x = bmax - D0 + s + beta k.
/// Throws ArgumentError for non-linear demand.
double marginal_user_share_closed_form(const MarketParams& p);

/// Central difference of Q_u*(bmax) with step `rel_step * bmax`.
double marginal_user_share_fd(const MarketParams& p, double rel_step = 1e-3,
                              const SolverConfig& cfg = {});

struct MmusChoice {
  double bmax = 0.0;
  bool non_monotone = false;  // curvature condition failed; grid scan used
};

/// Largest capacity whose marginal user share is still >= eta, searched on
/// [entry boundary, B_plat]. Returns B_plat when eta does not bind.
MmusChoice choose_bmax_mmus(const MarketParams& templ, double eta,
                            const SolverConfig& cfg = {});

/// Price at which a spam entrant exactly breaks even with the block at the
/// floor: r(D(g)) = s g. Linear demand: r0 D0 / (D0 s + beta r0).
double entry_threshold_price(const MarketParams& p);

/// Floor g with B_plat(g) = bmax. Closed form for linear demand, always
/// cross-checked against bisection on the strictly decreasing B_plat(g).
double choose_gmin_baseline(const MarketParams& templ, double bmax);

/// Share of newly used capacity going to users when the floor is lowered.
/// Empty in the congested region, where the ratio is 0/0.
std::optional<double> mu_user(const MarketParams& p, const SolverConfig& cfg = {});

struct RefinedFloor {
  double gmin = 0.0;
  bool eta_saturated = false;  // eta = 1: the share target is unreachable
};

/// max{baseline(bmax), min{entry threshold, sqrt(eta r0 / (beta (1 - eta)))}}.
RefinedFloor choose_gmin_refined(const MarketParams& templ, double bmax, double eta);

}  // namespace spamlab
