#include "spamlab/scaling.hpp"

#include <string>

#include "spamlab/design_rules.hpp"
#include "spamlab/equilibrium.hpp"
#include "spamlab/errors.hpp"

namespace spamlab {

D0Convention parse_d0_convention(std::string_view text) {
  if (text == "unscaled") return D0Convention::Unscaled;
  if (text == "scaled") return D0Convention::Scaled;
  throw ArgumentError("unknown D0 convention '" + std::string(text) + "'");
}

std::string_view d0_convention_name(D0Convention c) {
  return c == D0Convention::Unscaled ? "unscaled" : "scaled";
}

std::string_view scaling_rule_name(ScalingRule::Kind k) {
  switch (k) {
    case ScalingRule::Kind::Plateau:
      return "plateau";
    case ScalingRule::Kind::Mmus:
      return "mmus";
    case ScalingRule::Kind::Pfo:
      return "pfo";
  }
  return "?";
}

ScalingRule::Kind parse_scaling_rule(std::string_view text) {
  if (text == "plateau") return ScalingRule::Kind::Plateau;
  if (text == "mmus") return ScalingRule::Kind::Mmus;
  if (text == "pfo") return ScalingRule::Kind::Pfo;
  throw ArgumentError("unknown scaling rule '" + std::string(text) + "'");
}

MarketParams scale_market(const MarketParams& templ, double lambda, D0Convention convention) {
  if (!(lambda >= 1.0)) throw ArgumentError("scale factor must be >= 1");
  MarketParams p = templ;
  const double reference = templ.reference_gas();
  p.demand = templ.demand.scale(lambda);
  p.opportunity_reference =
      convention == D0Convention::Unscaled ? reference : lambda * reference;
  return p;
}

ScalingPoint scaling_point(const MarketParams& templ, double lambda, const ScalingRule& rule,
                           D0Convention convention, const SolverConfig& cfg) {
  const MarketParams scaled = scale_market(templ, lambda, convention);
  ScalingPoint pt;
  pt.lambda = lambda;
  pt.rule = rule;
  double spam_gas = 0.0;
  switch (rule.kind) {
    case ScalingRule::Kind::Plateau:
    case ScalingRule::Kind::Mmus: {
      pt.bmax_used = rule.kind == ScalingRule::Kind::Plateau
                         ? b_plat(scaled)
                         : choose_bmax_mmus(scaled, rule.eta, cfg).bmax;
      const Equilibrium eq = solve(scaled.with_bmax(pt.bmax_used), cfg);
      pt.spam_count = eq.spam_count;
      pt.user_gas = eq.user_gas;
      spam_gas = eq.spam_gas;
      break;
    }
    case ScalingRule::Kind::Pfo: {
      pt.bmax_used = b_plat(scaled);
      const PfoEquilibrium eq = solve_pfo(scaled.with_bmax(pt.bmax_used), rule.pfo, cfg);
      pt.spam_count = eq.total_spam;
      pt.user_gas = eq.total_user_gas;
      pt.converged = eq.converged;
      spam_gas = eq.spam_gas(scaled.s);
      break;
    }
  }
  const double included = spam_gas + pt.user_gas;
  pt.rho_spam = included > 0.0 ? spam_gas / included : 0.0;
  return pt;
}

std::vector<ScalingPoint> sweep_lambda(const MarketParams& templ, const ScalingRule& rule,
                                       std::span<const double> lambdas, D0Convention convention,
                                       const SolverConfig& cfg) {
  std::vector<ScalingPoint> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) out.push_back(scaling_point(templ, l, rule, convention, cfg));
  return out;
}

}  // namespace spamlab
