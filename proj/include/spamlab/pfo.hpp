#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spamlab/market.hpp"
#include "spamlab/metrics.hpp"
#include "spamlab/numeric.hpp"

namespace spamlab {

/// Approximate priority-fee ordering: the block is split into n sub-blocks
/// of capacity C = bmax / n, executed top first with random order inside each.
/// A fraction v of users bids for priority; the rest bid the inclusion price.
struct PfoParams {
  std::size_t n = 1;
  double v = 1.0;
  void validate() const;
};

struct PfoSubBlock {
  std::size_t index = 0;           // 1-based, top first
  double spam_count = 0.0;         // S_i
  double priority_user_gas = 0.0;  // Q_i^T
  double inclusion_user_gas = 0.0; // Q_i^L
  double residual = 0.0;           // L_i, slots left after spam and priority users
  double price = 0.0;              // g_i

  double user_gas() const { return priority_user_gas + inclusion_user_gas; }
};

/// User allocation for a fixed spam profile and block clearing price.
struct BlockFill {
  std::vector<PfoSubBlock> sub_blocks;
  std::size_t first_inclusion = 0;  // m: first sub-block with L_i > 0, n + 1 if none
  double post_spam_capacity = 0.0;  // A = sum (C - S_i s)_+
  double user_gas = 0.0;            // Q_u = min{D(bar_g), A}
};

/// Fills priority users top-down against v D(bar_g), then inclusion-only users
/// contiguously from sub-block m. Prices are P(Gamma_i^T / v) above m and
/// bar_g from m on. Throws ArgumentError for S_i outside [0, C/s].
BlockFill fill_block(std::span<const double> spam_profile, double bar_g, const MarketParams& p,
                     const PfoParams& pfo);

/// U_i(S_i) for 1-based sub-block i given solved S_1..S_{i-1} (`solved_prefix`,
/// which must have i - 1 entries). Later sub-blocks are taken spam-free.
/// Evaluated through fill_block; the solver uses an O(1) incremental form.
double subblock_utility(std::size_t i, double spam_i, std::span<const double> solved_prefix,
                        double bar_g, const MarketParams& p, const PfoParams& pfo);

struct PfoEquilibrium {
  std::vector<PfoSubBlock> sub_blocks;
  std::size_t first_inclusion = 0;
  double bar_g = 0.0;          // block clearing price
  double total_spam = 0.0;
  double total_user_gas = 0.0;
  bool converged = false;
  std::size_t outer_iterations = 0;
  bool used_bisection_fallback = false;
  /// Every fixed point found by the bracketing fallback, lowest first. The
  /// lowest is the one reported above.
  std::vector<double> candidate_prices;

  double spam_gas(double s) const { return s * total_spam; }
};

/// Solves U_i = 0 top-down for a candidate bar_g, then iterates
/// bar_g <- max{gmin, P(sum (C - S_i s)_+)} with damping; falls back to
/// bracketing the residual when the damped iteration stalls.
PfoEquilibrium solve_pfo(const MarketParams& p, const PfoParams& pfo,
                         const SolverConfig& cfg = {});

/// Top-down zero-profit sweep at a fixed bar_g (one inner pass of solve_pfo).
std::vector<double> solve_spam_profile(double bar_g, const MarketParams& p,
                                       const PfoParams& pfo, const SolverConfig& cfg = {});

struct PfoWorldMetrics {
  double w_user = 0.0;
  double revenue = 0.0;
  double externality = 0.0;
  double total_gas = 0.0;
};

/// Welfare, revenue and externality of a solved PFO block. With
/// `with_spam = false` the block is refilled spam-free at the spam-free
/// clearing price max{gmin, P(bmax)}.
PfoWorldMetrics pfo_metrics(const PfoEquilibrium& eq, const MarketParams& p,
                            const PfoParams& pfo, const CostParams& costs, bool with_spam,
                            const SolverConfig& cfg = {});

/// Both worlds and their differences.
MetricsReport pfo_report(const PfoEquilibrium& eq, const MarketParams& p, const PfoParams& pfo,
                         const CostParams& costs, const SolverConfig& cfg = {});

struct CdfPoint {
  double position;  // cumulative included gas / total included gas
  double share;     // cumulative spam gas / total spam gas
};

struct SpamLocation {
  std::vector<CdfPoint> points;  // piecewise linear, starts at (0, 0)
  bool no_spam = false;          // flat zero curve
};

/// Cumulative spam-gas share against normalized block position. Spam is
/// spread uniformly over its sub-block's gas.
SpamLocation spam_location_cdf(const PfoEquilibrium& eq, double s);

/// Linear interpolation of the CDF at a normalized position.
double cdf_at(const SpamLocation& cdf, double position);

}  // namespace spamlab
