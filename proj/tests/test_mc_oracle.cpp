#include <doctest.h>

#include <cmath>

#include "spamlab/equilibrium.hpp"
#include "spamlab/mc_oracle.hpp"

using namespace spamlab;

TEST_SUITE("mc_oracle") {
  TEST_CASE("claim probability estimates") {
    const McConfig cfg{1'000'000, 42};
    for (std::uint64_t s : {1u, 3u, 12u}) {
      const auto e = simulate_claim_probability(s, cfg);
      CHECK(std::abs(e.mean - claim_probability(static_cast<double>(s))) <= 3 * e.standard_error);
      CHECK(e.standard_error > 0);
    }
    const auto zero = simulate_claim_probability(0, cfg);
    CHECK(zero.mean == 0.0);
    CHECK(zero.standard_error == 0.0);
  }

  TEST_CASE("determinism and stream independence") {
    const McConfig cfg{100'000, 7};
    const auto a = simulate_claim_probability(5, cfg);
    const auto b = simulate_claim_probability(5, cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.standard_error == b.standard_error);
    CHECK(simulate_claim_probability(5, {100'000, 8}).mean != a.mean);
    CHECK(mix(1, 2) != mix(2, 1));
    TrialRng r(3, 4);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(r.below(7) < 7);
    }
  }

  TEST_CASE("integer entry brackets the continuous solution") {
    auto r = best_response_entry(reference_market(1500));
    CHECK(r.bracketed);
    CHECK((r.spam_count == 12 || r.spam_count == 13));
    r = best_response_entry(reference_market(400));
    CHECK(r.spam_count == 0);
    CHECK(r.bracketed);
    r = best_response_entry(reference_market(1000));
    CHECK((r.spam_count == 3 || r.spam_count == 4));
    for (double b = 300; b <= 1600; b += 25) {
      CAPTURE(b);
      CHECK(best_response_entry(reference_market(b)).bracketed);
    }
  }

  TEST_CASE("capture oracle against closed form") {
    const double k = 5.0;
    const McConfig cfg{1'000'000, 11};
    auto e = simulate_pfo_capture({3}, {1000}, k, cfg);
    CHECK(std::abs(e[0].mean / (k * 1000) - 0.75) <= 3 * e[0].standard_error / (k * 1000));

    e = simulate_pfo_capture({0, 0}, {500, 500}, k, cfg);
    CHECK(e[0].mean == 0.0);
    CHECK(e[1].mean == 0.0);

    // Hand evaluation: sub-block 1 keeps 500 / 2, sub-block 2 gets 500 / 2
    // of its own plus the 250 that escaped sub-block 1.
    const auto exact = analytic_pfo_capture({1, 1}, {500, 500}, k);
    CHECK(exact[0] == doctest::Approx(k * 250));
    CHECK(exact[1] == doctest::Approx(k * 500));
    e = simulate_pfo_capture({1, 1}, {500, 500}, k, cfg);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(e[i].mean - exact[i]) <= 3 * e[i].standard_error);

    const std::vector<std::uint64_t> spam{0, 2, 1};
    const std::vector<double> gas{400, 350, 250};
    const auto ex3 = analytic_pfo_capture(spam, gas, k);
    CHECK(ex3[0] == 0.0);
    CHECK(ex3[1] == doctest::Approx(k * (400 + 350 * 2.0 / 3.0)));
    CHECK(ex3[2] == doctest::Approx(k * (250 * 0.5 + 350.0 / 3.0)));
    e = simulate_pfo_capture(spam, gas, k, cfg);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(e[i].mean - ex3[i]) <= 3 * e[i].standard_error);
  }

  TEST_CASE("validation suite passes and is reproducible") {
    const auto a = run_validation({200'000, 5});
    const auto b = run_validation({200'000, 5});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CAPTURE(a[i].name);
      CHECK(a[i].passed);
      CHECK(a[i].estimate == b[i].estimate);
    }
  }
}
