#include "spamlab/pfo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spamlab/errors.hpp"

namespace spamlab {

void PfoParams::validate() const {
  if (n < 1) throw ArgumentError("pfo: need at least one sub-block");
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("pfo: v must lie in [0, 1]");
}

namespace {

double inverse_clamped(const DemandCurve& d, double q) {
  return d.inverse(std::clamp(q, 0.0, d.intercept()));
}

// max{gmin, P(A)} with A capped at D(0).
double implied_clearing_price(const MarketParams& p, double post_spam_capacity) {
  return std::max(p.gmin, inverse_clamped(p.demand, post_spam_capacity));
}

// Incremental top-down state for the per-sub-block zero-profit sweep at a
// fixed bar_g. Sub-blocks after the current one are spam-free, so the whole
// fill follows from prefix sums: Gamma_n^T = min{vD, A}, Q_u = min{D, A} and
// cumulative inclusion-only gas through j is min{sum_{l<=j} L_l, Q_u^L}.
class SubBlockSweep {
 public:
  SubBlockSweep(const MarketParams& p, const PfoParams& pfo, double bar_g)
      : p_(p),
        n_(pfo.n),
        v_(pfo.v),
        capacity_(p.bmax / static_cast<double>(pfo.n)),
        rate_(p.opportunity_rate()),
        bar_g_(bar_g),
        demand_(p.demand.eval(bar_g)),
        priority_demand_(pfo.v * demand_) {
    gamma_t_.reserve(n_ + 1);
    cum_l_.reserve(n_ + 1);
    gamma_t_.push_back(0.0);
    cum_l_.push_back(0.0);
  }

  std::size_t index() const { return gamma_t_.size(); }  // current 1-based i
  double max_spam() const { return capacity_ / p_.s; }

  struct Eval {
    double own_gas;  // Q_i
    double price;    // g_i
    double spillover;
  };

  Eval evaluate(double x) const {
    const std::size_t i = index();
    const double cap = std::max(0.0, capacity_ - x * p_.s);
    const double gamma_prev = gamma_t_.back();
    const double qt = std::max(0.0, std::min(cap, priority_demand_ - gamma_prev));
    const double l = std::max(0.0, cap - qt);
    const double cum_l_i = cum_l_.back() + l;
    const double a = cap_prefix_ + cap + static_cast<double>(n_ - i) * capacity_;
    const double qu_l = std::min(demand_, a) - std::min(priority_demand_, a);

    auto gamma_at = [&](std::size_t j) { return gamma_t_[j] + std::min(cum_l_[j], qu_l); };
    Eval e;
    e.own_gas = qt + std::min(cum_l_i, qu_l) - std::min(cum_l_.back(), qu_l);
    e.price = (cum_l_i == 0.0 && v_ > 0.0)
                  ? inverse_clamped(p_.demand, (gamma_prev + qt) / v_)
                  : bar_g_;
    // Opportunities from the spam-free run h+1..i-1 reach i alive, plus those
    // that escaped the last spammed sub-block h.
    const double through_prev = gamma_at(i - 1);
    const double through_h = gamma_at(last_spam_);
    e.spillover = through_prev - through_h;
    if (last_spam_ >= 1) {
      e.spillover += (through_h - gamma_at(last_spam_ - 1)) / (last_spam_count_ + 1.0);
    }
    return e;
  }

  double utility(double x) const {
    const Eval e = evaluate(x);
    return rate_ * (e.own_gas * x / (x + 1.0) + e.spillover) - x * p_.s * e.price;
  }

  // Sign of U just above zero: the spillover term, or the marginal profit
  // of the first entrant when there is no spillover.
  bool positive_at_zero() const {
    const Eval e = evaluate(0.0);
    if (e.spillover > 0.0) return true;
    return rate_ * e.own_gas - p_.s * e.price > 0.0;
  }

  void commit(double x) {
    const std::size_t i = index();
    const double cap = std::max(0.0, capacity_ - x * p_.s);
    const double gamma_prev = gamma_t_.back();
    const double qt = std::max(0.0, std::min(cap, priority_demand_ - gamma_prev));
    const double l = std::max(0.0, cap - qt);
    gamma_t_.push_back(gamma_prev + qt);
    cum_l_.push_back(cum_l_.back() + l);
    cap_prefix_ += cap;
    if (x > 0.0) {
      last_spam_ = i;
      last_spam_count_ = x;
    }
  }

 private:
  const MarketParams& p_;
  std::size_t n_;
  double v_;
  double capacity_;
  double rate_;
  double bar_g_;
  double demand_;
  double priority_demand_;
  std::vector<double> gamma_t_;  // Gamma_j^T, j = 0..i-1
  std::vector<double> cum_l_;    // sum_{l<=j} L_l, j = 0..i-1
  double cap_prefix_ = 0.0;
  std::size_t last_spam_ = 0;  // h
  double last_spam_count_ = 0.0;
};

double solve_subblock(const SubBlockSweep& sweep, const SolverConfig& cfg) {
  const double xmax = sweep.max_spam();
  auto u = [&sweep](double x) { return sweep.utility(x); };
  const auto scan = scan_down_crossing(u, 0.0, xmax, cfg.scan_points, sweep.positive_at_zero());
  if (scan.crossing) {
    return bisect_down_crossing(u, scan.crossing->lo, scan.crossing->hi, cfg.root_tol,
                                cfg.max_bisection_iterations);
  }
  return scan.positive_at_hi ? xmax : 0.0;
}

double post_spam_capacity(std::span<const double> profile, const MarketParams& p) {
  const double cap = p.bmax / static_cast<double>(profile.size());
  double a = 0.0;
  for (double x : profile) a += std::max(0.0, cap - x * p.s);
  return a;
}

}  // namespace

BlockFill fill_block(std::span<const double> spam_profile, double bar_g, const MarketParams& p,
                     const PfoParams& pfo) {
  pfo.validate();
  if (spam_profile.size() != pfo.n) {
    throw ArgumentError("fill_block: profile length must equal n");
  }
  if (!(bar_g >= p.gmin)) throw ArgumentError("fill_block: bar_g below the floor");
  const std::size_t n = pfo.n;
  const double cap = p.bmax / static_cast<double>(n);
  const double xmax = cap / p.s;
  const double demand = p.demand.eval(bar_g);
  const double priority = pfo.v * demand;

  BlockFill fill;
  fill.sub_blocks.resize(n);
  fill.first_inclusion = n + 1;
  double gamma_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = spam_profile[i];
    if (!(x >= 0.0) || x > xmax * (1.0 + 1e-12)) {
      throw ArgumentError("fill_block: spam in sub-block " + std::to_string(i + 1) +
                          " outside [0, C/s]");
    }
    auto& sb = fill.sub_blocks[i];
    sb.index = i + 1;
    sb.spam_count = x;
    const double room = std::max(0.0, cap - x * p.s);
    sb.priority_user_gas = std::max(0.0, std::min(room, priority - gamma_t));
    sb.residual = std::max(0.0, room - sb.priority_user_gas);
    gamma_t += sb.priority_user_gas;
    fill.post_spam_capacity += room;
    if (sb.residual > 0.0 && fill.first_inclusion == n + 1) fill.first_inclusion = i + 1;
  }
  fill.user_gas = std::min(demand, fill.post_spam_capacity);
  double inclusion_left = std::max(0.0, fill.user_gas - gamma_t);
  double gamma_i = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& sb = fill.sub_blocks[i];
    gamma_i += sb.priority_user_gas;
    if (i + 1 >= fill.first_inclusion) {
      sb.inclusion_user_gas = std::min(sb.residual, inclusion_left);
      inclusion_left -= sb.inclusion_user_gas;
    }
    sb.price = (i + 1 < fill.first_inclusion && pfo.v > 0.0)
                   ? inverse_clamped(p.demand, gamma_i / pfo.v)
                   : bar_g;
  }
  return fill;
}

double subblock_utility(std::size_t i, double spam_i, std::span<const double> solved_prefix,
                        double bar_g, const MarketParams& p, const PfoParams& pfo) {
  if (i < 1 || i > pfo.n) throw ArgumentError("subblock_utility: index out of range");
  if (solved_prefix.size() != i - 1) {
    throw ArgumentError("subblock_utility: prefix must hold S_1..S_{i-1}");
  }
  std::vector<double> profile(pfo.n, 0.0);
  std::copy(solved_prefix.begin(), solved_prefix.end(), profile.begin());
  profile[i - 1] = spam_i;
  const BlockFill fill = fill_block(profile, bar_g, p, pfo);

  std::size_t h = 0;
  for (std::size_t j = 1; j < i; ++j) {
    if (profile[j - 1] > 0.0) h = j;
  }
  double spill = 0.0;
  for (std::size_t j = h + 1; j < i; ++j) spill += fill.sub_blocks[j - 1].user_gas();
  if (h >= 1) spill += fill.sub_blocks[h - 1].user_gas() / (profile[h - 1] + 1.0);
  const auto& own = fill.sub_blocks[i - 1];
  return p.opportunity_rate() * (own.user_gas() * spam_i / (spam_i + 1.0) + spill) -
         spam_i * p.s * own.price;
}

std::vector<double> solve_spam_profile(double bar_g, const MarketParams& p, const PfoParams& pfo,
                                       const SolverConfig& cfg) {
  SubBlockSweep sweep(p, pfo, bar_g);
  std::vector<double> profile;
  profile.reserve(pfo.n);
  for (std::size_t i = 0; i < pfo.n; ++i) {
    const double x = solve_subblock(sweep, cfg);
    sweep.commit(x);
    profile.push_back(x);
  }
  return profile;
}

PfoEquilibrium solve_pfo(const MarketParams& p, const PfoParams& pfo, const SolverConfig& cfg) {
  p.validate();
  pfo.validate();
  if (!(p.gmin > 0.0)) throw ArgumentError("solve_pfo: needs gmin > 0");

  auto next_price = [&](double bar_g, std::vector<double>& profile) {
    profile = solve_spam_profile(bar_g, p, pfo, cfg);
    return implied_clearing_price(p, post_spam_capacity(profile, p));
  };
  auto close_enough = [&](double a, double b) {
    return std::abs(a - b) <= cfg.fixed_point_tol * std::max(1.0, std::abs(a));
  };

  PfoEquilibrium eq;
  std::vector<double> profile;
  double bar_g = implied_clearing_price(p, p.bmax);
  double best_step = std::numeric_limits<double>::infinity();
  std::size_t since_progress = 0;
  for (std::size_t it = 1; it <= cfg.max_outer_iterations; ++it) {
    eq.outer_iterations = it;
    double next = next_price(bar_g, profile);
    if (close_enough(bar_g, next)) {
      eq.converged = true;
      // Keep iterating while the residual still shrinks; the stopping
      // tolerance bounds the step, not the distance to the fixed point.
      double residual = std::abs(next - bar_g);
      for (int polish = 0; polish < 200 && residual > 1e-14 * std::max(1.0, bar_g); ++polish) {
        const double candidate = std::max(p.gmin, bar_g + cfg.damping * (next - bar_g));
        std::vector<double> trial;
        const double trial_next = next_price(candidate, trial);
        const double trial_residual = std::abs(trial_next - candidate);
        if (!(trial_residual < residual)) break;
        bar_g = candidate;
        next = trial_next;
        residual = trial_residual;
        profile = std::move(trial);
      }
      break;
    }
    const double step = std::abs(next - bar_g);
    if (step < 0.999 * best_step) {
      best_step = step;
      since_progress = 0;
    } else if (++since_progress >= 50) {
      break;  // oscillating
    }
    bar_g = std::max(p.gmin, bar_g + cfg.damping * (next - bar_g));
  }

  if (!eq.converged) {
    eq.used_bisection_fallback = true;
    std::vector<double> scratch;
    auto residual = [&](double g) { return g - next_price(g, scratch); };
    double hi = p.demand.inverse(0.0);
    if (!std::isfinite(hi)) hi = p.demand.inverse(1e-12 * p.demand.intercept());
    hi = std::max(hi, p.gmin * (1.0 + 1e-9));
    const std::size_t points = std::max<std::size_t>(cfg.scan_points, 2);
    double prev_g = p.gmin;
    double prev_r = residual(prev_g);
    if (prev_r == 0.0) eq.candidate_prices.push_back(prev_g);
    for (std::size_t j = 1; j <= points; ++j) {
      const double g = p.gmin + (hi - p.gmin) * static_cast<double>(j) / points;
      const double r = residual(g);
      if ((prev_r < 0.0 && r >= 0.0) || (prev_r > 0.0 && r <= 0.0)) {
        const double root = bisect_root(residual, prev_g, g,
                                        cfg.fixed_point_tol * 1e-3 * std::max(1.0, g), 400);
        // Discard jumps of the residual that are not fixed points.
        if (std::abs(residual(root)) <= 1e-6 * std::max(1.0, root)) {
          eq.candidate_prices.push_back(root);
        }
      }
      prev_g = g;
      prev_r = r;
    }
    std::sort(eq.candidate_prices.begin(), eq.candidate_prices.end());
    if (!eq.candidate_prices.empty()) {
      bar_g = eq.candidate_prices.front();
      eq.converged = true;
    }
    next_price(bar_g, profile);
  } else {
    eq.candidate_prices.push_back(bar_g);
  }

  const BlockFill fill = fill_block(profile, bar_g, p, pfo);
  eq.sub_blocks = fill.sub_blocks;
  eq.first_inclusion = fill.first_inclusion;
  eq.bar_g = bar_g;
  eq.total_user_gas = fill.user_gas;
  eq.total_spam = 0.0;
  for (double x : profile) eq.total_spam += x;
  return eq;
}

namespace {

// Integral of P(y) over [0, x].
double gross_surplus(const DemandCurve& d, double x, double tol) {
  if (x <= 0.0) return 0.0;
  return user_welfare(d, std::min(x, d.intercept()), 0.0, tol);
}

PfoWorldMetrics world_metrics(const BlockFill& fill, double bar_g, const MarketParams& p,
                              const PfoParams& pfo, const CostParams& costs, double tol) {
  PfoWorldMetrics m;
  const double v = pfo.v;
  double gamma_t = 0.0;
  double inclusion = 0.0;
  for (const auto& sb : fill.sub_blocks) {
    const double gas = sb.user_gas() + sb.spam_count * p.s;
    m.revenue += sb.price * gas;
    m.total_gas += gas;
    if (v > 0.0 && sb.priority_user_gas > 0.0) {
      // integral over [a, b] of P(q / v) - g_i = v (F(b/v) - F(a/v)) - g_i (b - a)
      const double a = gamma_t;
      const double b = gamma_t + sb.priority_user_gas;
      m.w_user += v * (gross_surplus(p.demand, b / v, tol) - gross_surplus(p.demand, a / v, tol)) -
                  sb.price * (b - a);
    }
    gamma_t += sb.priority_user_gas;
    inclusion += sb.inclusion_user_gas;
  }
  if (v < 1.0 && inclusion > 0.0) {
    m.w_user += (1.0 - v) * gross_surplus(p.demand, inclusion / (1.0 - v), tol) - bar_g * inclusion;
  }
  m.externality = externality(costs, p.bmax, std::min(m.total_gas, p.bmax));
  return m;
}

}  // namespace

PfoWorldMetrics pfo_metrics(const PfoEquilibrium& eq, const MarketParams& p, const PfoParams& pfo,
                            const CostParams& costs, bool with_spam, const SolverConfig& cfg) {
  costs.validate();
  if (with_spam) {
    BlockFill fill;
    fill.sub_blocks = eq.sub_blocks;
    fill.first_inclusion = eq.first_inclusion;
    fill.user_gas = eq.total_user_gas;
    return world_metrics(fill, eq.bar_g, p, pfo, costs, cfg.quadrature_tol);
  }
  const double bar_g0 = implied_clearing_price(p, p.bmax);
  const std::vector<double> zeros(pfo.n, 0.0);
  return world_metrics(fill_block(zeros, bar_g0, p, pfo), bar_g0, p, pfo, costs,
                       cfg.quadrature_tol);
}

MetricsReport pfo_report(const PfoEquilibrium& eq, const MarketParams& p, const PfoParams& pfo,
                         const CostParams& costs, const SolverConfig& cfg) {
  const auto spam = pfo_metrics(eq, p, pfo, costs, true, cfg);
  const auto clean = pfo_metrics(eq, p, pfo, costs, false, cfg);
  MetricsReport m;
  m.w_user = spam.w_user;
  m.revenue = spam.revenue;
  m.externality = spam.externality;
  m.w_user0 = clean.w_user;
  m.revenue0 = clean.revenue;
  m.externality0 = clean.externality;
  m.delta_w = m.w_user - m.w_user0;
  m.delta_r = m.revenue - m.revenue0;
  m.delta_e = m.externality - m.externality0;
  return m;
}

SpamLocation spam_location_cdf(const PfoEquilibrium& eq, double s) {
  SpamLocation out;
  double total_gas = 0.0;
  double total_spam = 0.0;
  for (const auto& sb : eq.sub_blocks) {
    total_gas += sb.user_gas() + sb.spam_count * s;
    total_spam += sb.spam_count * s;
  }
  out.points.push_back({0.0, 0.0});
  if (total_spam <= 0.0 || total_gas <= 0.0) {
    out.no_spam = true;
    out.points.push_back({1.0, 0.0});
    return out;
  }
  double gas = 0.0;
  double spam = 0.0;
  for (const auto& sb : eq.sub_blocks) {
    const double spam_gas = sb.spam_count * s;
    const double block_gas = sb.user_gas() + spam_gas;
    if (block_gas <= 0.0) continue;
    gas += block_gas;
    spam += spam_gas;
    out.points.push_back({std::min(1.0, gas / total_gas), std::min(1.0, spam / total_spam)});
  }
  out.points.back() = {1.0, 1.0};
  return out;
}

double cdf_at(const SpamLocation& cdf, double position) {
  const auto& pts = cdf.points;
  if (position <= pts.front().position) return pts.front().share;
  for (std::size_t j = 1; j < pts.size(); ++j) {
    if (position <= pts[j].position) {
      const double span = pts[j].position - pts[j - 1].position;
      if (span <= 0.0) return pts[j].share;
      const double t = (position - pts[j - 1].position) / span;
      return pts[j - 1].share + t * (pts[j].share - pts[j - 1].share);
    }
  }
  return pts.back().share;
}

}  // namespace spamlab
