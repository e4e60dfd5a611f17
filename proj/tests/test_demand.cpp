#include <doctest.h>

#include <cmath>
#include <random>

#include "spamlab/demand.hpp"
#include "spamlab/errors.hpp"

using namespace spamlab;

namespace {

double central_difference(const DemandCurve& d, double g, int order) {
  const double h = 1e-5 * std::max(1.0, g);
  if (order == 1) return (d.eval(g + h) - d.eval(g - h)) / (2.0 * h);
  return (d.derivative(g + h, 1) - d.derivative(g - h, 1)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("demand") {
  TEST_CASE("linear evaluation, inverse and clamping") {
    const auto d = DemandCurve::linear(1200, 6);
    CHECK(d.eval(20) == doctest::Approx(1080).epsilon(1e-15));
    CHECK(d.eval(200) == 0.0);
    CHECK(d.eval(350) == 0.0);
    CHECK(d.inverse(1000) == doctest::Approx(200.0 / 6.0).epsilon(1e-14));
    CHECK(d.inverse(0) == doctest::Approx(200));
    CHECK(d.inverse(1080) == doctest::Approx(20));
    CHECK(d.derivative(50, 1) == -6.0);
    CHECK(d.derivative(50, 2) == 0.0);
    CHECK(d.derivative(200, 1) == -6.0);  // left derivative at the kink
    CHECK(d.choke_price() == doctest::Approx(200));
  }

  TEST_CASE("exponential evaluation") {
    const auto d = DemandCurve::exponential(1200, 0.01);
    CHECK(d.eval(0) == 1200.0);
    CHECK(d.derivative(0, 1) == doctest::Approx(-12));
    CHECK(d.eval(100) == doctest::Approx(1200 * std::exp(-1.0)));
    CHECK(std::isinf(d.inverse(0)));
    CHECK(std::isinf(d.choke_price()));
  }

  TEST_CASE("errors") {
    const auto d = DemandCurve::linear(1200, 6);
    CHECK_THROWS_AS(d.eval(-1), DomainError);
    CHECK_THROWS_AS(d.inverse(1201), DomainError);
    CHECK_THROWS_AS(d.derivative(10, 3), ArgumentError);
    CHECK_THROWS_AS(d.scale(0.5), ArgumentError);
    CHECK_THROWS_AS(DemandCurve::linear(-1, 6), ArgumentError);
    CHECK_THROWS_AS(DemandCurve::exponential(1200, 0), ArgumentError);
  }

  TEST_CASE("scaling multiplies quantities") {
    const auto lin = DemandCurve::linear(1200, 6).scale(2);
    REQUIRE(lin.as_linear());
    CHECK(lin.as_linear()->d0 == 2400);
    CHECK(lin.as_linear()->beta == 12);
    CHECK(lin.eval(20) == 2160);
    const auto ex = DemandCurve::exponential(1200, 0.01);
    CHECK(ex.scale(3).eval(0) == 3600);
    for (double g : {0.0, 5.0, 77.0, 150.0}) {
      CHECK(ex.scale(1).eval(g) == ex.eval(g));
      CHECK(ex.scale(2.5).eval(g) == doctest::Approx(2.5 * ex.eval(g)).epsilon(1e-15));
      CHECK(DemandCurve::linear(1200, 6).scale(2.5).eval(g) ==
            doctest::Approx(2.5 * DemandCurve::linear(1200, 6).eval(g)).epsilon(1e-15));
    }
  }

  TEST_CASE("monotone, round trip and derivatives on random prices") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> price(0.01, 199.0);
    const DemandCurve curves[] = {DemandCurve::linear(1200, 6), DemandCurve::exponential(1200, 0.01),
                                  DemandCurve::exponential(500, 0.05), curvature_counterexample(1000)};
    for (const auto& d : curves) {
      CAPTURE(d.describe());
      for (int k = 0; k < 200; ++k) {
        double g1 = price(rng), g2 = price(rng);
        if (g1 > g2) std::swap(g1, g2);
        CHECK(d.eval(g1) >= d.eval(g2));
        CHECK(std::abs(d.inverse(d.eval(g1)) - g1) <= 1e-8 * std::max(1.0, g1));
        for (int order : {1, 2}) {
          const double exact = d.derivative(g1, order);
          const double fd = central_difference(d, g1, order);
          CHECK(std::abs(exact - fd) <= 1e-4 * std::max(std::abs(exact), 1e-6));
        }
      }
    }
  }

  TEST_CASE("curvature condition") {
    const auto lin = DemandCurve::linear(1200, 6);
    for (double g : {1.0, 20.0, 100.0}) CHECK(mmus_condition(lin, g) == doctest::Approx(-14400));
    const auto ex = DemandCurve::exponential(1200, 0.01);
    for (double g : {0.0, 10.0, 100.0, 1000.0}) CHECK(mmus_condition(ex, g) < 0.0);

    // Independent evaluation: a^2 e^{-(1-(1+g)^-2)} (g^3 - 4g - 2) / (1+g)^6.
    const double a = 1000;
    const auto c = curvature_counterexample(a);
    for (double g : {0.5, 1.0, 2.0, 3.0, 10.0, 50.0}) {
      const double t = 1.0 + g;
      const double expected =
          a * a * std::exp(-(1.0 - 1.0 / (t * t))) * (g * g * g - 4 * g - 2) / std::pow(t, 6);
      CHECK(mmus_condition(c, g) == doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK(mmus_condition(c, 1.0) < 0.0);
    CHECK(mmus_condition(c, 10.0) > 0.0);
  }

  TEST_CASE("custom curve needs all callables") {
    DemandCurve::Custom c;
    c.value = [](double g) { return 100.0 - g; };
    CHECK_THROWS_AS(DemandCurve::custom(c), ArgumentError);
  }
}
