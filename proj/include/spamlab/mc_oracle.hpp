#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spamlab/market.hpp"

namespace spamlab {

struct McConfig {
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 42;
  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// SplitMix64 finalizer of seed and trial index. Each trial owns its stream,
/// so results do not depend on trial order.
std::uint64_t mix(std::uint64_t seed, std::uint64_t trial);

/// Per-trial SplitMix64 stream.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) : state_(mix(seed, trial)) {}
  std::uint64_t next();
  double uniform();  // [0, 1) with 53 random bits
  std::uint64_t below(std::uint64_t bound);  // uniform on {0, ..., bound - 1}

 private:
  std::uint64_t state_;
};

/// Opportunity placed uniformly among S + 1 relative positions; a claim
/// happens unless it lands last.
McEstimate simulate_claim_probability(std::uint64_t spam_count, const McConfig& cfg);

struct EntryResult {
  std::uint64_t spam_count = 0;  // integer stopping point
  double continuous = 0.0;       // continuous zero-profit S*
  bool bracketed = false;        // spam_count in {floor(S*), ceil(S*)}
};

/// Integer free entry: add one spam transaction at a time while the entrant's
/// expected profit u(S + 1) / (S + 1) at post-entry prices is positive.
/// Throws ConvergenceError if entry would exceed bmax / s.
EntryResult best_response_entry(const MarketParams& p);

/// Expected capture value per sub-block with the opportunity placed
/// proportionally to user gas and uniformly among each sub-block's S_i + 1
/// slots; a miss spills to the next sub-block with spam. Each trial scores
/// r = rate * sum(user_gas) for the capturing sub-block. At most 8 sub-blocks.
std::vector<McEstimate> simulate_pfo_capture(const std::vector<std::uint64_t>& spam,
                                             const std::vector<double>& user_gas, double rate,
                                             const McConfig& cfg);

/// Closed-form counterpart: rate (Q_i S_i / (S_i + 1) + spillover into i)
/// for sub-blocks with spam, 0 otherwise.
std::vector<double> analytic_pfo_capture(const std::vector<std::uint64_t>& spam,
                                         const std::vector<double>& user_gas, double rate);

struct ValidationCheck {
  std::string name;
  double estimate = 0.0;
  double expected = 0.0;
  double standard_error = 0.0;  // 0 for deterministic checks
  bool passed = false;
  bool reran = false;
};

/// Full oracle suite at the reference market. Statistical checks that miss
/// 3 standard errors are rerun once with twice the trials.
std::vector<ValidationCheck> run_validation(const McConfig& cfg);

}  // namespace spamlab
