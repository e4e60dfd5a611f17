#pragma once

#include <optional>
#include <string>

#include "spamlab/market.hpp"
#include "spamlab/metrics.hpp"
#include "spamlab/numeric.hpp"
#include "spamlab/pfo.hpp"

namespace spamlab {

/// Everything a CLI run needs. Missing sections fall back to the reference
/// market (bmax = 1000), costs (0, 1), no PFO section and default tolerances.
struct Scenario {
  MarketParams market = reference_market();
  CostParams costs;
  std::optional<PfoParams> pfo;
  SolverConfig solver;
};

/// Parses a JSON scenario. Unknown keys, wrong types and invalid values
/// throw ConfigError naming the offending path.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

std::string scenario_to_json(const Scenario& sc);

}  // namespace spamlab
