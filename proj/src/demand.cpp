#include "spamlab/demand.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spamlab/errors.hpp"

namespace spamlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_price(double g) {
  if (!(g >= 0.0)) throw DomainError("demand: price must be nonnegative");
}

}  // namespace

DemandCurve DemandCurve::linear(double d0, double beta) {
  if (!(d0 > 0.0) || !(beta > 0.0)) {
    throw ArgumentError("linear demand needs d0 > 0 and beta > 0");
  }
  return DemandCurve(Linear{d0, beta});
}

DemandCurve DemandCurve::exponential(double d0, double lambda) {
  if (!(d0 > 0.0) || !(lambda > 0.0)) {
    throw ArgumentError("exponential demand needs d0 > 0 and lambda > 0");
  }
  return DemandCurve(Exponential{d0, lambda});
}

DemandCurve DemandCurve::custom(Custom c) {
  if (!c.value || !c.first || !c.second) {
    throw ArgumentError("custom demand needs value, first and second derivative");
  }
  if (!(c.value(0.0) > 0.0)) {
    throw ArgumentError("custom demand needs D(0) > 0");
  }
  return DemandCurve(std::move(c));
}

double DemandCurve::eval(double g) const {
  require_price(g);
  return std::visit(
      Overloaded{
          [g](const Linear& l) { return std::max(0.0, l.d0 - l.beta * g); },
          [g](const Exponential& e) { return e.d0 * std::exp(-e.lambda * g); },
          [g](const Custom& c) { return std::max(0.0, c.value(g)); },
      },
      v_);
}

double DemandCurve::choke_price() const {
  return std::visit(
      Overloaded{
          [](const Linear& l) { return l.d0 / l.beta; },
          [](const Exponential&) { return kInf; },
          [](const Custom& c) {
            // Expand until demand is exhausted; curves with a positive
            // asymptote never are.
            double hi = 1.0;
            for (int i = 0; i < 80; ++i, hi *= 2.0) {
              if (c.value(hi) <= 0.0) break;
            }
            if (c.value(hi) > 0.0) return kInf;
            double lo = 0.0;
            for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
              const double mid = 0.5 * (lo + hi);
              (c.value(mid) > 0.0 ? lo : hi) = mid;
            }
            return hi;
          },
      },
      v_);
}

double DemandCurve::inverse(double q) const {
  const double top = intercept();
  if (!(q >= 0.0)) throw DomainError("inverse demand: quantity must be nonnegative");
  if (q > top * (1.0 + 1e-12)) {
    throw DomainError("inverse demand: quantity exceeds D(0)");
  }
  q = std::min(q, top);
  return std::visit(
      Overloaded{
          [q](const Linear& l) { return (l.d0 - q) / l.beta; },
          [q](const Exponential& e) {
            return q <= 0.0 ? kInf : std::log(e.d0 / q) / e.lambda;
          },
          [q, this](const Custom& c) {
            if (q <= 0.0) return choke_price();
            if (q >= c.value(0.0)) return 0.0;
            double hi = 1.0;
            int expansions = 0;
            while (c.value(hi) > q) {
              hi *= 2.0;
              // At or below a positive asymptote no finite price clears q.
              if (++expansions > 1000 || !std::isfinite(hi)) return kInf;
            }
            double lo = 0.0;
            // Relative tolerance 1e-10 on the price, tightened to round-off.
            for (int i = 0; i < 300 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
              const double mid = 0.5 * (lo + hi);
              (c.value(mid) > q ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
          },
      },
      v_);
}

double DemandCurve::derivative(double g, int order) const {
  if (order != 1 && order != 2) {
    throw ArgumentError("demand derivative order must be 1 or 2");
  }
  require_price(g);
  return std::visit(
      Overloaded{
          [g, order](const Linear& l) {
            if (order == 2) return 0.0;
            // Left derivative at the kink; zero once demand is exhausted.
            return g <= l.d0 / l.beta ? -l.beta : 0.0;
          },
          [g, order](const Exponential& e) {
            const double d = e.d0 * std::exp(-e.lambda * g);
            return order == 1 ? -e.lambda * d : e.lambda * e.lambda * d;
          },
          [g, order](const Custom& c) {
            return order == 1 ? c.first(g) : c.second(g);
          },
      },
      v_);
}

DemandCurve DemandCurve::scale(double lambda_scale) const {
  if (!(lambda_scale >= 1.0)) {
    throw ArgumentError("demand scale factor must be >= 1");
  }
  return std::visit(
      Overloaded{
          [lambda_scale](const Linear& l) {
            return DemandCurve(Linear{lambda_scale * l.d0, lambda_scale * l.beta});
          },
          [lambda_scale](const Exponential& e) {
            return DemandCurve(Exponential{lambda_scale * e.d0, e.lambda});
          },
          [lambda_scale](const Custom& c) {
            Custom out;
            out.value = [f = c.value, lambda_scale](double g) { return lambda_scale * f(g); };
            out.first = [f = c.first, lambda_scale](double g) { return lambda_scale * f(g); };
            out.second = [f = c.second, lambda_scale](double g) { return lambda_scale * f(g); };
            out.name = c.name;
            return DemandCurve(std::move(out));
          },
      },
      v_);
}

std::string DemandCurve::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&os](const Linear& l) { os << "linear(d0=" << l.d0 << ", beta=" << l.beta << ")"; },
                 [&os](const Exponential& e) {
                   os << "exponential(d0=" << e.d0 << ", lambda=" << e.lambda << ")";
                 },
                 [&os](const Custom& c) { os << c.name; },
             },
             v_);
  return os.str();
}

double mmus_condition(const DemandCurve& curve, double g) {
  const double d = curve.eval(g);
  const double d1 = curve.derivative(g, 1);
  const double d2 = curve.derivative(g, 2);
  return g * d * d2 + 2.0 * d * d1 - 2.0 * g * d1 * d1;
}

DemandCurve curvature_counterexample(double a) {
  if (!(a > 0.0)) throw ArgumentError("counterexample curve needs a > 0");
  DemandCurve::Custom c;
  c.value = [a](double g) {
    const double w = 1.0 / ((1.0 + g) * (1.0 + g));
    return a * std::exp(-0.5 * (1.0 - w));
  };
  // D' = -D / (1+g)^3
  c.first = [v = c.value](double g) { return -v(g) / std::pow(1.0 + g, 3); };
  // D'' = D / (1+g)^6 + 3 D / (1+g)^4
  c.second = [v = c.value](double g) {
    const double d = v(g);
    return d / std::pow(1.0 + g, 6) + 3.0 * d / std::pow(1.0 + g, 4);
  };
  c.name = "curvature-counterexample";
  return DemandCurve::custom(std::move(c));
}

}  // namespace spamlab
