#include "spamlab/mc_oracle.hpp"

#include <cmath>
#include <functional>

#include "spamlab/equilibrium.hpp"
#include "spamlab/errors.hpp"

namespace spamlab {

void McConfig::validate() const {
  if (trials < 1) throw ArgumentError("mc: trials must be >= 1");
}

namespace {

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Mean and standard error from a running sum and sum of squares.
McEstimate summarize(double sum, double sum_sq, std::uint64_t n) {
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = n > 1 ? std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0)) : 0.0;
  return {mean, std::sqrt(var / nn)};
}

}  // namespace

std::uint64_t mix(std::uint64_t seed, std::uint64_t trial) {
  return splitmix_finalize(splitmix_finalize(seed + kGolden) ^ (trial * kGolden));
}

std::uint64_t TrialRng::next() {
  state_ += kGolden;
  return splitmix_finalize(state_);
}

double TrialRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t TrialRng::below(std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

McEstimate simulate_claim_probability(std::uint64_t spam_count, const McConfig& cfg) {
  cfg.validate();
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    TrialRng rng(cfg.seed, t);
    if (rng.below(spam_count + 1) != spam_count) ++hits;
  }
  const double n = static_cast<double>(cfg.trials);
  const double mean = static_cast<double>(hits) / n;
  return {mean, std::sqrt(mean * (1.0 - mean) / n)};
}

EntryResult best_response_entry(const MarketParams& p) {
  p.validate();
  const double max_spam = p.bmax / p.s;
  EntryResult r;
  while (true) {
    const double next = static_cast<double>(r.spam_count + 1);
    if (next > max_spam) {
      if (spam_margin(p, max_spam) > 0.0) {
        throw ConvergenceError("best_response_entry: entry still profitable at bmax / s");
      }
      break;
    }
    if (!(spam_utility(p, next) / next > 0.0)) break;
    ++r.spam_count;
  }
  r.continuous = solve(p).spam_count;
  const double c = static_cast<double>(r.spam_count);
  r.bracketed = c == std::floor(r.continuous) || c == std::ceil(r.continuous);
  return r;
}

std::vector<McEstimate> simulate_pfo_capture(const std::vector<std::uint64_t>& spam,
                                             const std::vector<double>& user_gas, double rate,
                                             const McConfig& cfg) {
  cfg.validate();
  const std::size_t n = spam.size();
  if (n == 0 || n > 8 || user_gas.size() != n) {
    throw ArgumentError("simulate_pfo_capture: need 1..8 sub-blocks with matching gas");
  }
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(user_gas[i] >= 0.0)) throw ArgumentError("simulate_pfo_capture: negative user gas");
    total += user_gas[i];
    cumulative[i] = total;
  }
  std::vector<std::uint64_t> hits(n, 0);
  if (total > 0.0) {
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      TrialRng rng(cfg.seed, t);
      const double u = rng.uniform() * total;
      std::size_t j = 0;
      while (j + 1 < n && !(u < cumulative[j])) ++j;
      while (j < n && user_gas[j] == 0.0) ++j;  // zero-width sub-blocks are never drawn
      if (j == n) continue;
      const std::uint64_t slot = rng.below(spam[j] + 1);
      std::size_t c = j;
      if (spam[j] == 0 || slot == spam[j]) {
        c = j + 1;
        while (c < n && spam[c] == 0) ++c;
      }
      if (c < n) ++hits[c];
    }
  }
  const double value = rate * total;
  std::vector<McEstimate> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = static_cast<double>(hits[i]);
    out[i] = summarize(value * h, value * value * h, cfg.trials);
  }
  return out;
}

std::vector<double> analytic_pfo_capture(const std::vector<std::uint64_t>& spam,
                                         const std::vector<double>& user_gas, double rate) {
  const std::size_t n = spam.size();
  if (user_gas.size() != n) throw ArgumentError("analytic_pfo_capture: size mismatch");
  std::vector<double> out(n, 0.0);
  double carried = 0.0;  // opportunity mass still live when sub-block i starts
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(spam[i]);
    if (spam[i] > 0) {
      out[i] = rate * (user_gas[i] * s / (s + 1.0) + carried);
      carried = user_gas[i] / (s + 1.0);
    } else {
      carried += user_gas[i];
    }
  }
  return out;
}

namespace {

ValidationCheck statistical(std::string name, double expected,
                            const std::function<McEstimate(const McConfig&)>& run,
                            const McConfig& cfg) {
  ValidationCheck c;
  c.name = std::move(name);
  c.expected = expected;
  auto judge = [&](const McEstimate& e) {
    c.estimate = e.mean;
    c.standard_error = e.standard_error;
    const double diff = std::abs(e.mean - expected);
    return e.standard_error == 0.0 ? diff <= 1e-12 * std::max(1.0, std::abs(expected))
                                   : diff <= 3.0 * e.standard_error;
  };
  c.passed = judge(run(cfg));
  if (!c.passed) {
    c.reran = true;
    c.passed = judge(run(McConfig{2 * cfg.trials, cfg.seed}));
  }
  return c;
}

void add_capture_checks(std::vector<ValidationCheck>& out, const std::string& label,
                        const std::vector<std::uint64_t>& spam,
                        const std::vector<double>& user_gas, double rate, const McConfig& cfg) {
  const auto expected = analytic_pfo_capture(spam, user_gas, rate);
  std::vector<McEstimate> first;
  auto estimates = [&](const McConfig& c) {
    if (c.trials == cfg.trials && !first.empty()) return first;
    auto e = simulate_pfo_capture(spam, user_gas, rate, c);
    if (c.trials == cfg.trials) first = e;
    return e;
  };
  for (std::size_t i = 0; i < spam.size(); ++i) {
    out.push_back(statistical(label + " sub-block " + std::to_string(i + 1), expected[i],
                              [&, i](const McConfig& c) { return estimates(c)[i]; }, cfg));
  }
}

}  // namespace

std::vector<ValidationCheck> run_validation(const McConfig& cfg) {
  cfg.validate();
  std::vector<ValidationCheck> out;
  for (std::uint64_t s : {0ULL, 1ULL, 3ULL, 12ULL}) {
    const double expected = static_cast<double>(s) / static_cast<double>(s + 1);
    out.push_back(statistical("claim probability S=" + std::to_string(s), expected,
                              [s](const McConfig& c) { return simulate_claim_probability(s, c); },
                              cfg));
  }
  for (double b : {400.0, 1000.0, 1500.0}) {
    const EntryResult r = best_response_entry(reference_market(b));
    ValidationCheck c;
    c.name = "best response bmax=" + std::to_string(static_cast<int>(b));
    c.estimate = static_cast<double>(r.spam_count);
    c.expected = r.continuous;
    c.passed = r.bracketed;
    out.push_back(c);
  }
  const double rate = reference_market().opportunity_rate();
  add_capture_checks(out, "capture n=1 S=(3)", {3}, {1000.0}, rate, cfg);
  add_capture_checks(out, "capture n=2 S=(1,1)", {1, 1}, {500.0, 500.0}, rate, cfg);
  add_capture_checks(out, "capture n=3 S=(0,2,1)", {0, 2, 1}, {400.0, 350.0, 250.0}, rate, cfg);
  add_capture_checks(out, "capture n=3 S=(2,0,0)", {2, 0, 0}, {300.0, 300.0, 300.0}, rate, cfg);
  add_capture_checks(out, "capture n=2 S=(0,0)", {0, 0}, {500.0, 500.0}, rate, cfg);
  return out;
}

}  // namespace spamlab
