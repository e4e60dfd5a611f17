#pragma once

#include <optional>

#include "spamlab/demand.hpp"

namespace spamlab {

/// Design levers and market constants of a single block.
struct MarketParams {
  DemandCurve demand;
  double s;     // gas reserved per spam transaction
  double r0;    // opportunity value when included user gas equals the reference
  double gmin;  // protocol price floor
  double bmax;  // block capacity in gas

  /// Reference user gas in r = r0 * Q_u / reference. Empty means D(0) of
  /// `demand`. Demand-scaling sweeps pin it to the unscaled intercept.
  std::optional<double> opportunity_reference;

  double reference_gas() const {
    return opportunity_reference.value_or(demand.intercept());
  }
  /// dr/dQ_u: opportunity value per unit of included user gas.
  double opportunity_rate() const { return r0 / reference_gas(); }
  double opportunity(double user_gas) const { return opportunity_rate() * user_gas; }

  /// Throws ArgumentError on s <= 0, r0 < 0, gmin < 0 or bmax <= 0.
  void validate() const;

  MarketParams with_bmax(double b) const {
    MarketParams p = *this;
    p.bmax = b;
    return p;
  }
  MarketParams with_gmin(double g) const {
    MarketParams p = *this;
    p.gmin = g;
    return p;
  }
};

/// D0 = 1200, beta = 6, s = 20, r0 = 6000, gmin = 20 and the given capacity.
MarketParams reference_market(double bmax = 1000.0);

}  // namespace spamlab
