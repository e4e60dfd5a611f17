#include "spamlab/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "spamlab/errors.hpp"

namespace spamlab {

namespace {

using json = nlohmann::json;

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t count(const json& j, const std::string& key, const std::string& path,
                  std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(path + "." + key + ": expected a nonnegative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

DemandCurve parse_demand(const json& j) {
  require_object(j, "market.demand");
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("market.demand.type: expected \"linear\" or \"exponential\"");
  }
  const std::string type = j.at("type").get<std::string>();
  const std::string path = "market.demand";
  auto required = [&](const char* key) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return number(j, key, path, 0.0);
  };
  if (type == "linear") {
    reject_unknown(j, path, {"type", "d0", "beta"});
    return DemandCurve::linear(required("d0"), required("beta"));
  }
  if (type == "exponential") {
    reject_unknown(j, path, {"type", "d0", "lambda"});
    return DemandCurve::exponential(required("d0"), required("lambda"));
  }
  throw ConfigError(path + ".type: unknown demand type '" + type + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  require_object(root, "scenario");
  reject_unknown(root, "scenario", {"market", "costs", "pfo", "solver"});

  Scenario sc;
  try {
    if (root.contains("market")) {
      const json& m = root.at("market");
      require_object(m, "market");
      reject_unknown(m, "market", {"demand", "s", "r0", "gmin", "bmax", "opportunity_reference"});
      if (m.contains("demand")) sc.market.demand = parse_demand(m.at("demand"));
      sc.market.s = number(m, "s", "market", sc.market.s);
      sc.market.r0 = number(m, "r0", "market", sc.market.r0);
      sc.market.gmin = number(m, "gmin", "market", sc.market.gmin);
      sc.market.bmax = number(m, "bmax", "market", sc.market.bmax);
      if (m.contains("opportunity_reference")) {
        sc.market.opportunity_reference = number(m, "opportunity_reference", "market", 0.0);
      }
    }
    sc.market.validate();
    if (root.contains("costs")) {
      const json& c = root.at("costs");
      require_object(c, "costs");
      reject_unknown(c, "costs", {"c1", "c2"});
      sc.costs.c1 = number(c, "c1", "costs", sc.costs.c1);
      sc.costs.c2 = number(c, "c2", "costs", sc.costs.c2);
    }
    sc.costs.validate();
    if (root.contains("pfo")) {
      const json& f = root.at("pfo");
      require_object(f, "pfo");
      reject_unknown(f, "pfo", {"n", "v"});
      PfoParams pfo;
      pfo.n = count(f, "n", "pfo", pfo.n);
      pfo.v = number(f, "v", "pfo", pfo.v);
      pfo.validate();
      sc.pfo = pfo;
    }
    if (root.contains("solver")) {
      const json& s = root.at("solver");
      require_object(s, "solver");
      reject_unknown(s, "solver",
                     {"root_tol", "scan_points", "max_bisection_iterations", "fixed_point_tol",
                      "max_outer_iterations", "damping", "quadrature_tol"});
      SolverConfig& cfg = sc.solver;
      cfg.root_tol = number(s, "root_tol", "solver", cfg.root_tol);
      cfg.scan_points = count(s, "scan_points", "solver", cfg.scan_points);
      cfg.max_bisection_iterations =
          count(s, "max_bisection_iterations", "solver", cfg.max_bisection_iterations);
      cfg.fixed_point_tol = number(s, "fixed_point_tol", "solver", cfg.fixed_point_tol);
      cfg.max_outer_iterations =
          count(s, "max_outer_iterations", "solver", cfg.max_outer_iterations);
      cfg.damping = number(s, "damping", "solver", cfg.damping);
      cfg.quadrature_tol = number(s, "quadrature_tol", "solver", cfg.quadrature_tol);
      if (!(cfg.root_tol > 0.0) || !(cfg.fixed_point_tol > 0.0) || !(cfg.quadrature_tol > 0.0) ||
          cfg.scan_points < 2 || !(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
        throw ConfigError("solver: tolerances must be positive, scan_points >= 2, damping in (0, 1]");
      }
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& sc) {
  json demand;
  if (const auto* lin = sc.market.demand.as_linear()) {
    demand = {{"type", "linear"}, {"d0", lin->d0}, {"beta", lin->beta}};
  } else if (const auto* ex = sc.market.demand.as_exponential()) {
    demand = {{"type", "exponential"}, {"d0", ex->d0}, {"lambda", ex->lambda}};
  } else {
    throw ConfigError("scenario: custom demand curves cannot be serialized");
  }
  json root = {
      {"market",
       {{"demand", demand},
        {"s", sc.market.s},
        {"r0", sc.market.r0},
        {"gmin", sc.market.gmin},
        {"bmax", sc.market.bmax}}},
      {"costs", {{"c1", sc.costs.c1}, {"c2", sc.costs.c2}}},
      {"solver",
       {{"root_tol", sc.solver.root_tol},
        {"scan_points", sc.solver.scan_points},
        {"max_bisection_iterations", sc.solver.max_bisection_iterations},
        {"fixed_point_tol", sc.solver.fixed_point_tol},
        {"max_outer_iterations", sc.solver.max_outer_iterations},
        {"damping", sc.solver.damping},
        {"quadrature_tol", sc.solver.quadrature_tol}}},
  };
  if (sc.market.opportunity_reference) {
    root["market"]["opportunity_reference"] = *sc.market.opportunity_reference;
  }
  if (sc.pfo) root["pfo"] = {{"n", sc.pfo->n}, {"v", sc.pfo->v}};
  return root.dump(2) + "\n";
}

}  // namespace spamlab
