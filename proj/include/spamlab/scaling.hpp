#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "spamlab/market.hpp"
#include "spamlab/numeric.hpp"
#include "spamlab/pfo.hpp"

namespace spamlab {

/// Which intercept normalizes the opportunity value r = r0 Q_u / D0 once
/// demand is scaled by lambda.
enum class D0Convention {
  Unscaled,  // keep the template's D0: opportunity grows with the user base
  Scaled,    // use lambda D0: opportunity per user stays fixed
};

D0Convention parse_d0_convention(std::string_view text);
std::string_view d0_convention_name(D0Convention c);

struct ScalingRule {
  enum class Kind { Plateau, Mmus, Pfo };
  Kind kind = Kind::Plateau;
  double eta = 0.6;  // Mmus only
  PfoParams pfo;     // Pfo only; capacity is the plateau size of the scaled market
};

std::string_view scaling_rule_name(ScalingRule::Kind k);
ScalingRule::Kind parse_scaling_rule(std::string_view text);

struct ScalingPoint {
  double lambda = 1.0;
  ScalingRule rule;
  double bmax_used = 0.0;
  double spam_count = 0.0;
  double user_gas = 0.0;
  double rho_spam = 0.0;  // s S / (s S + Q_u)
  bool converged = true;
};

/// Template with demand scaled by lambda >= 1 under the given convention.
MarketParams scale_market(const MarketParams& templ, double lambda, D0Convention convention);

ScalingPoint scaling_point(const MarketParams& templ, double lambda, const ScalingRule& rule,
                           D0Convention convention, const SolverConfig& cfg = {});

std::vector<ScalingPoint> sweep_lambda(const MarketParams& templ, const ScalingRule& rule,
                                       std::span<const double> lambdas,
                                       D0Convention convention = D0Convention::Unscaled,
                                       const SolverConfig& cfg = {});

}  // namespace spamlab
