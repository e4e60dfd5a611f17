#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spamlab/design_rules.hpp"
#include "spamlab/errors.hpp"

using namespace spamlab;
using spamlab::testing::reference_model;

namespace {

MarketParams exponential_market(double bmax) {
  return {DemandCurve::exponential(1200, 0.02), 20, 6000, 5, bmax, std::nullopt};
}

// Plateau size written out directly from its definition.
double plateau_oracle(double g) {
  const double d = std::max(0.0, 1200 - 6 * g);
  return d + std::max(0.0, 5.0 * d / g - 20);
}

}  // namespace

TEST_SUITE("design_rules") {
  TEST_CASE("marginal user share examples") {
    CHECK(marginal_user_share(reference_market(1000)) == doctest::Approx(0.68380).epsilon(1e-5));
    CHECK(marginal_user_share(reference_market(1330)) == doctest::Approx(2.0 / 7.0).epsilon(1e-9));
    CHECK(marginal_user_share(reference_market(1329.999)) ==
          doctest::Approx(2.0 / 7.0).epsilon(1e-5));
    CHECK(marginal_user_share(reference_market(400)) == 1.0);
    CHECK(marginal_user_share(reference_market(1400)) == 0.0);
    CHECK_THROWS_AS(marginal_user_share_closed_form(exponential_market(900)), ArgumentError);
  }

  TEST_CASE("closed form against an independent finite difference") {
    for (double b = 485; b <= 1325; b += 5) {
      CAPTURE(b);
      const double h = 1e-3 * b;
      const double fd = (reference_model(b + h).user_gas() - reference_model(b - h).user_gas()) / (2 * h);
      CHECK(std::abs(marginal_user_share(reference_market(b)) - fd) <= 1e-4);
      CHECK(std::abs(marginal_user_share_fd(reference_market(b)) - fd) <= 1e-6);
    }
  }

  TEST_CASE("share falls across the congested region") {
    for (const bool linear : {true, false}) {
      const MarketParams templ = linear ? reference_market() : exponential_market(1000);
      const double lo = entry_boundary(templ);
      const double hi = b_plat(templ);
      REQUIRE(lo < hi);
      double prev = 2.0;
      for (int j = 1; j <= 200; ++j) {
        const double b = lo + (hi - lo) * j / 201.0;
        const double m = marginal_user_share(templ.with_bmax(b));
        CHECK(m < prev + 1e-9);
        CHECK(m > 0.0);
        CHECK(m < 1.0);
        prev = m;
      }
    }
  }

  TEST_CASE("MMUS capacity rule") {
    const auto templ = reference_market();
    const auto pick = choose_bmax_mmus(templ, 0.6);
    CHECK(pick.bmax == doctest::Approx(1150 - std::sqrt(6000.0)).epsilon(1e-9));
    CHECK_FALSE(pick.non_monotone);
    CHECK(choose_bmax_mmus(templ, 1e-6).bmax == doctest::Approx(1330));
    CHECK(choose_bmax_mmus(templ, 0.28571).bmax == doctest::Approx(1330));
    for (double eta : {0.05, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0}) {
      const double b = choose_bmax_mmus(templ, eta).bmax;
      CHECK(b <= 1330 + 1e-9);
      if (b > entry_boundary(templ) + 1e-6 && b < 1330 - 1e-6) {
        CHECK(marginal_user_share(templ.with_bmax(b)) == doctest::Approx(eta).epsilon(1e-6));
      }
    }
    CHECK_THROWS_AS(choose_bmax_mmus(templ, 0.0), ArgumentError);
    const auto ex = choose_bmax_mmus(exponential_market(1000), 0.6);
    CHECK(marginal_user_share(exponential_market(ex.bmax)) == doctest::Approx(0.6).epsilon(1e-4));
  }

  TEST_CASE("MMUS falls back to a grid scan when the share is not monotone") {
    // Curvature condition is positive at high prices, so the share first rises.
    const MarketParams templ{curvature_counterexample(1000), 1.0, 50.0, 0.5, 700, std::nullopt};
    const double lo = entry_boundary(templ);
    const double hi = b_plat(templ);
    const auto pick = choose_bmax_mmus(templ, 0.6);
    CHECK(pick.non_monotone);
    CHECK(pick.bmax > lo);
    CHECK(pick.bmax < hi);
    CHECK(marginal_user_share(templ.with_bmax(pick.bmax)) == doctest::Approx(0.6).epsilon(1e-3));
    for (double b = pick.bmax + 1.0; b < hi - 1.0; b += 1.0) {
      CHECK(marginal_user_share(templ.with_bmax(b)) < 0.6);
    }
  }

  TEST_CASE("baseline floor") {
    const auto templ = reference_market();
    CHECK(choose_gmin_baseline(templ, 1000) == doctest::Approx(46.5037).epsilon(1e-6));
    CHECK(choose_gmin_baseline(templ, 1330) == doctest::Approx(20));
    CHECK(choose_gmin_baseline(templ, 1180) == doctest::Approx(29.22).epsilon(1e-3));
    CHECK(choose_gmin_baseline(templ, 300) == doctest::Approx(150));  // no-entry branch
    for (double b : {300.0, 600.0, 1000.0, 1180.0, 1330.0, 2500.0}) {
      const double g = choose_gmin_baseline(templ, b);
      CHECK(plateau_oracle(g) == doctest::Approx(b).epsilon(1e-9));
    }
    const double g = choose_gmin_baseline(templ, 1000);
    for (double lower : {1.0, 10.0, 30.0}) {
      CHECK(solve(templ.with_gmin(lower)).clearing_price == doctest::Approx(g).epsilon(1e-9));
    }
  }

  TEST_CASE("user share of released capacity") {
    const auto slack = reference_market(5000);
    CHECK(*mu_user(slack) == doctest::Approx(2400.0 / 8400.0).epsilon(1e-12));
    CHECK(*mu_user(slack.with_gmin(120)) == 1.0);
    CHECK(*mu_user(slack.with_gmin(std::sqrt(1500.0))) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK_FALSE(mu_user(reference_market(1000)).has_value());
    double prev = 0.0;
    for (double g = 5; g < 120; g += 5) {
      const double m = *mu_user(slack.with_gmin(g));
      CHECK(m > prev);
      prev = m;
    }
  }

  TEST_CASE("refined floor") {
    const auto templ = reference_market();
    CHECK(entry_threshold_price(templ) == doctest::Approx(120));
    CHECK(choose_gmin_refined(templ, 1000, 0.6).gmin == doctest::Approx(46.5037).epsilon(1e-6));
    CHECK(choose_gmin_refined(templ, 1330, 0.6).gmin == doctest::Approx(38.7298).epsilon(1e-6));
    CHECK(choose_gmin_refined(templ, 1330, 0.99).gmin == doctest::Approx(120));
    const auto saturated = choose_gmin_refined(templ, 1330, 1.0);
    CHECK(saturated.eta_saturated);
    CHECK(saturated.gmin == doctest::Approx(120));
  }
}
