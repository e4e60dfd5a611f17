#include "spamlab/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "spamlab/design_rules.hpp"
#include "spamlab/equilibrium.hpp"
#include "spamlab/errors.hpp"
#include "spamlab/mc_oracle.hpp"
#include "spamlab/metrics.hpp"
#include "spamlab/pfo.hpp"
#include "spamlab/scaling.hpp"
#include "spamlab/scenario.hpp"

namespace spamlab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

using json = nlohmann::json;

// JSON numbers carry the same 9 significant digits as CSV cells.
json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::strtod(format_number(x).c_str(), nullptr);
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) : width_(header.size()) {
    line(std::vector<std::string>(header));
  }
  Csv& cell(double x) { return cell(format_number(x)); }
  Csv& cell(const std::string& s) {
    row_.push_back(s);
    if (row_.size() == width_) {
      line(row_);
      row_.clear();
    }
    return *this;
  }
  Csv& cell(std::string_view s) { return cell(std::string(s)); }
  Csv& cell(const char* s) { return cell(std::string(s)); }
  Csv& cell(std::size_t n) { return cell(std::to_string(n)); }
  Csv& cell(bool b) { return cell(b ? "true" : "false"); }
  std::string str() const { return buf_.str(); }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) buf_ << (i ? "," : "") << cells[i];
    buf_ << '\n';
  }
  std::size_t width_;
  std::vector<std::string> row_;
  std::ostringstream buf_;
};

struct Options {
  std::string config;
  std::string out;
  std::optional<double> from, to, step;
  double eta = 0.6;
  std::optional<std::size_t> n;
  std::vector<double> v;
  double lambda_max = 50.0;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 42;
  std::string rule = "plateau";
  std::string d0_convention = "unscaled";
};

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write output file '" + o.out + "'");
  f << text;
}

Scenario scenario_of(const Options& o) {
  return o.config.empty() ? Scenario{} : load_scenario(o.config);
}

std::vector<double> bmax_grid(const Options& o, double fallback, bool default_to_sweep) {
  if (!default_to_sweep && !o.from && !o.to && !o.step) return {fallback};
  return make_grid(o.from.value_or(200.0), o.to.value_or(1600.0), o.step.value_or(10.0));
}

PfoParams pfo_of(const Options& o, const Scenario& sc, double v) {
  PfoParams p = sc.pfo.value_or(PfoParams{});
  if (o.n) p.n = *o.n;
  p.v = v;
  p.validate();
  return p;
}

std::vector<double> v_list(const Options& o, const Scenario& sc) {
  if (!o.v.empty()) return o.v;
  return {sc.pfo ? sc.pfo->v : 1.0};
}

json equilibrium_json(const MarketParams& p, const Equilibrium& eq) {
  return {{"bmax", num(p.bmax)},
          {"regime", std::string(regime_name(eq.regime))},
          {"spam_count", num(eq.spam_count)},
          {"clearing_price", num(eq.clearing_price)},
          {"user_gas", num(eq.user_gas)},
          {"spam_gas", num(eq.spam_gas)},
          {"total_gas", num(eq.total_gas)},
          {"opportunity", num(eq.opportunity)}};
}

void add_metrics(json& j, const MetricsReport& m) {
  j["w_user"] = num(m.w_user);
  j["revenue"] = num(m.revenue);
  j["externality"] = num(m.externality);
  j["w_user0"] = num(m.w_user0);
  j["revenue0"] = num(m.revenue0);
  j["externality0"] = num(m.externality0);
  j["delta_w"] = num(m.delta_w);
  j["delta_r"] = num(m.delta_r);
  j["delta_e"] = num(m.delta_e);
  j["w_plus_r"] = num(m.w_plus_r());
  j["w_plus_r0"] = num(m.w_plus_r0());
}

void metric_cells(Csv& csv, const MetricsReport& m) {
  csv.cell(m.w_user).cell(m.revenue).cell(m.externality);
  csv.cell(m.w_user0).cell(m.revenue0).cell(m.externality0);
  csv.cell(m.delta_w).cell(m.delta_r).cell(m.delta_e);
  csv.cell(m.w_plus_r()).cell(m.w_plus_r0());
}

int cmd_solve(const Options& o, std::ostream& out, bool with_metrics) {
  const Scenario sc = scenario_of(o);
  const Equilibrium eq = solve(sc.market, sc.solver);
  json j = equilibrium_json(sc.market, eq);
  if (with_metrics) add_metrics(j, report(sc.market, eq, sc.costs, sc.solver));
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_sweep_bmax(const Options& o, std::ostream& out) {
  const Scenario sc = scenario_of(o);
  const auto grid = bmax_grid(o, sc.market.bmax, true);
  Csv csv{"bmax",        "regime",   "spam_count",  "clearing_price", "user_gas", "spam_gas",
          "total_gas",   "w_user",   "revenue",     "externality",    "w_user0",  "revenue0",
          "externality0", "delta_w", "delta_r",     "delta_e",        "w_plus_r", "w_plus_r0"};
  for (const auto& row : sweep_bmax(sc.market, sc.costs, grid, sc.solver)) {
    csv.cell(row.bmax).cell(regime_name(row.eq.regime)).cell(row.eq.spam_count);
    csv.cell(row.eq.clearing_price).cell(row.eq.user_gas).cell(row.eq.spam_gas);
    csv.cell(row.eq.total_gas);
    metric_cells(csv, row.metrics);
  }
  emit(o, csv.str(), out);
  return kExitOk;
}

int cmd_design_bmax(const Options& o, std::ostream& out) {
  const Scenario sc = scenario_of(o);
  const MmusChoice choice = choose_bmax_mmus(sc.market, o.eta, sc.solver);
  if (o.from || o.to || o.step) {
    Csv csv{"bmax", "m_user", "spam_count", "user_gas", "clearing_price", "eta", "mmus_bmax"};
    for (double b : bmax_grid(o, sc.market.bmax, true)) {
      const MarketParams p = sc.market.with_bmax(b);
      const Equilibrium eq = solve(p, sc.solver);
      csv.cell(b).cell(marginal_user_share(p, sc.solver)).cell(eq.spam_count);
      csv.cell(eq.user_gas).cell(eq.clearing_price).cell(o.eta).cell(choice.bmax);
    }
    emit(o, csv.str(), out);
    return kExitOk;
  }
  const json j = {{"eta", num(o.eta)},
                  {"bmax", num(choice.bmax)},
                  {"non_monotone", choice.non_monotone},
                  {"b_plat", num(b_plat(sc.market))},
                  {"entry_boundary", num(entry_boundary(sc.market))}};
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_design_gmin(const Options& o, std::ostream& out) {
  const Scenario sc = scenario_of(o);
  const double bmax = sc.market.bmax;
  const RefinedFloor refined = choose_gmin_refined(sc.market, bmax, o.eta);
  const auto mu = mu_user(sc.market, sc.solver);
  const json j = {{"bmax", num(bmax)},
                  {"eta", num(o.eta)},
                  {"baseline_gmin", num(choose_gmin_baseline(sc.market, bmax))},
                  {"refined_gmin", num(refined.gmin)},
                  {"eta_saturated", refined.eta_saturated},
                  {"entry_threshold_price", num(entry_threshold_price(sc.market))},
                  {"gmin", num(sc.market.gmin)},
                  {"mu_user", mu ? num(*mu) : json(nullptr)}};
  emit(o, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_pfo(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = scenario_of(o);
  const auto grid = bmax_grid(o, sc.market.bmax, false);
  Csv csv{"n",           "v",           "bmax",      "bar_g",    "total_spam", "spam_gas",
          "user_gas",    "converged",   "w_user",    "revenue",  "externality", "w_user0",
          "revenue0",    "externality0", "delta_w",  "delta_r",  "delta_e",     "w_plus_r",
          "w_plus_r0"};
  bool all_converged = true;
  for (double v : v_list(o, sc)) {
    const PfoParams pfo = pfo_of(o, sc, v);
    for (double b : grid) {
      const MarketParams p = sc.market.with_bmax(b);
      const PfoEquilibrium eq = solve_pfo(p, pfo, sc.solver);
      if (!eq.converged) {
        all_converged = false;
        err << "pfo: no fixed point at v=" << format_number(v) << " bmax=" << format_number(b)
            << "\n";
      }
      csv.cell(pfo.n).cell(v).cell(b).cell(eq.bar_g).cell(eq.total_spam);
      csv.cell(eq.spam_gas(p.s)).cell(eq.total_user_gas).cell(eq.converged);
      metric_cells(csv, pfo_report(eq, p, pfo, sc.costs, sc.solver));
    }
  }
  emit(o, csv.str(), out);
  return all_converged ? kExitOk : kExitNoConvergence;
}

int cmd_pfo_cdf(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = scenario_of(o);
  Csv csv{"n", "v", "bmax", "position", "share", "no_spam"};
  bool all_converged = true;
  for (double v : v_list(o, sc)) {
    const PfoParams pfo = pfo_of(o, sc, v);
    const PfoEquilibrium eq = solve_pfo(sc.market, pfo, sc.solver);
    if (!eq.converged) {
      all_converged = false;
      err << "pfo-cdf: no fixed point at v=" << format_number(v) << "\n";
    }
    const SpamLocation cdf = spam_location_cdf(eq, sc.market.s);
    for (const auto& pt : cdf.points) {
      csv.cell(pfo.n).cell(v).cell(sc.market.bmax).cell(pt.position).cell(pt.share);
      csv.cell(cdf.no_spam);
    }
  }
  emit(o, csv.str(), out);
  return all_converged ? kExitOk : kExitNoConvergence;
}

int cmd_scale(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario sc = scenario_of(o);
  const D0Convention convention = parse_d0_convention(o.d0_convention);
  ScalingRule rule;
  rule.kind = parse_scaling_rule(o.rule);
  rule.eta = o.eta;
  const auto lambdas = make_grid(o.from.value_or(1.0), o.to.value_or(o.lambda_max),
                                 o.step.value_or(1.0));
  const std::vector<double> vs =
      rule.kind == ScalingRule::Kind::Pfo ? v_list(o, sc) : std::vector<double>{0.0};
  Csv csv{"lambda", "rule", "eta", "n", "v", "bmax_used", "spam_count", "user_gas", "rho_spam",
          "converged"};
  bool all_converged = true;
  for (double v : vs) {
    if (rule.kind == ScalingRule::Kind::Pfo) rule.pfo = pfo_of(o, sc, v);
    for (const auto& pt : sweep_lambda(sc.market, rule, lambdas, convention, sc.solver)) {
      if (!pt.converged) {
        all_converged = false;
        err << "scale: no fixed point at lambda=" << format_number(pt.lambda) << "\n";
      }
      const bool is_pfo = rule.kind == ScalingRule::Kind::Pfo;
      csv.cell(pt.lambda).cell(scaling_rule_name(rule.kind));
      csv.cell(rule.kind == ScalingRule::Kind::Mmus ? format_number(rule.eta) : std::string());
      csv.cell(is_pfo ? std::to_string(rule.pfo.n) : std::string());
      csv.cell(is_pfo ? format_number(rule.pfo.v) : std::string());
      csv.cell(pt.bmax_used).cell(pt.spam_count).cell(pt.user_gas).cell(pt.rho_spam);
      csv.cell(pt.converged);
    }
  }
  emit(o, csv.str(), out);
  return all_converged ? kExitOk : kExitNoConvergence;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto checks = run_validation(McConfig{o.trials, o.seed});
  bool ok = true;
  Csv csv{"check", "estimate", "expected", "standard_error", "passed", "reran"};
  std::ostringstream lines;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    lines << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << format_number(c.estimate)
          << " vs " << format_number(c.expected) << " (se " << format_number(c.standard_error)
          << (c.reran ? ", rerun" : "") << ")\n";
    csv.cell(c.name).cell(c.estimate).cell(c.expected).cell(c.standard_error).cell(c.passed);
    csv.cell(c.reran);
  }
  if (o.out.empty()) {
    out << lines.str();
  } else {
    emit(o, csv.str(), out);
    out << lines.str();
  }
  return ok ? kExitOk : kExitNoConvergence;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spam equilibrium engine", "spamlab"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario JSON file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output file (default: standard output)");
  };
  auto grid = [&](CLI::App* sub) {
    sub->add_option("--from", o.from, "First grid value");
    sub->add_option("--to", o.to, "Last grid value");
    sub->add_option("--step", o.step, "Grid step")->check(CLI::PositiveNumber);
  };
  auto pfo_flags = [&](CLI::App* sub) {
    sub->add_option("--n", o.n, "Number of sub-blocks")->check(CLI::PositiveNumber);
    sub->add_option("--v", o.v, "Priority-bidding share(s), comma separated")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
  };

  auto* solve_cmd = app.add_subcommand("solve", "Random-ordering equilibrium at one capacity");
  common(solve_cmd);
  auto* metrics_cmd = app.add_subcommand("metrics", "Equilibrium plus welfare metrics");
  common(metrics_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep-bmax", "Equilibrium and metrics over capacities");
  common(sweep_cmd);
  grid(sweep_cmd);
  auto* dbmax_cmd = app.add_subcommand("design-bmax", "Marginal-user-share capacity rule");
  common(dbmax_cmd);
  grid(dbmax_cmd);
  dbmax_cmd->add_option("--eta", o.eta, "Target marginal user share")->check(CLI::Range(0.0, 1.0));
  auto* dgmin_cmd = app.add_subcommand("design-gmin", "Price-floor rules");
  common(dgmin_cmd);
  dgmin_cmd->add_option("--eta", o.eta, "Target user share")->check(CLI::Range(0.0, 1.0));
  auto* pfo_cmd = app.add_subcommand("pfo", "Priority-fee-ordering equilibrium and metrics");
  common(pfo_cmd);
  grid(pfo_cmd);
  pfo_flags(pfo_cmd);
  auto* cdf_cmd = app.add_subcommand("pfo-cdf", "Location of spam within the block");
  common(cdf_cmd);
  pfo_flags(cdf_cmd);
  auto* scale_cmd = app.add_subcommand("scale", "Spam share of included gas as demand scales");
  common(scale_cmd);
  grid(scale_cmd);
  pfo_flags(scale_cmd);
  scale_cmd->add_option("--eta", o.eta, "Target share for the mmus rule")
      ->check(CLI::Range(0.0, 1.0));
  scale_cmd->add_option("--lambda-max", o.lambda_max, "Largest scale factor")
      ->check(CLI::Range(1.0, 1e9));
  scale_cmd->add_option("--rule", o.rule, "Capacity rule")
      ->check(CLI::IsMember({"plateau", "mmus", "pfo"}));
  scale_cmd->add_option("--scaled-d0", o.d0_convention, "Opportunity normalization")
      ->check(CLI::IsMember({"scaled", "unscaled"}));
  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo oracle suite");
  common(validate_cmd);
  validate_cmd->add_option("--trials", o.trials, "Trials per check")->check(CLI::PositiveNumber);
  validate_cmd->add_option("--seed", o.seed, "Random seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out;
    std::ostringstream help_err;
    const int code = app.exit(e, help_out, help_err);
    out << help_out.str();
    err << help_err.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve_cmd) return cmd_solve(o, out, false);
    if (*metrics_cmd) return cmd_solve(o, out, true);
    if (*sweep_cmd) return cmd_sweep_bmax(o, out);
    if (*dbmax_cmd) return cmd_design_bmax(o, out);
    if (*dgmin_cmd) return cmd_design_gmin(o, out);
    if (*pfo_cmd) return cmd_pfo(o, out, err);
    if (*cdf_cmd) return cmd_pfo_cdf(o, out, err);
    if (*scale_cmd) return cmd_scale(o, out, err);
    if (*validate_cmd) return cmd_validate(o, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    // Config, argument and domain errors all trace back to the inputs.
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace spamlab
