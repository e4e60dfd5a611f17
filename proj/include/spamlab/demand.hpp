#pragma once

#include <functional>
#include <string>
#include <variant>

namespace spamlab {

/// Decreasing user demand D(g): gas units demanded at gas price g.
///
/// Linear curves clamp at zero beyond the choke price d0/beta. Derivatives
/// at the kink are taken from the left, so D'(d0/beta) = -beta.
class DemandCurve {
 public:
  struct Linear {
    double d0;
    double beta;
  };
  struct Exponential {
    double d0;
    double lambda;
  };
  /// Arbitrary smooth decreasing curve. All three callables are required;
  /// curvature is never estimated numerically.
  struct Custom {
    std::function<double(double)> value;
    std::function<double(double)> first;
    std::function<double(double)> second;
    std::string name = "custom";
  };

  static DemandCurve linear(double d0, double beta);
  static DemandCurve exponential(double d0, double lambda);
  static DemandCurve custom(Custom c);

  /// max(0, D(g)). Throws DomainError for g < 0.
  double eval(double g) const;
  double operator()(double g) const { return eval(g); }

  /// Inverse demand P(q) for 0 <= q <= D(0). P(0) is the choke price, which
  /// is +infinity for curves that never reach zero, and so is P(q) for any q
  /// at or below a positive asymptote.
  double inverse(double q) const;

  /// D'(g) for order 1, D''(g) for order 2. Other orders throw ArgumentError.
  double derivative(double g, int order) const;

  /// Curve with value lambda_scale * D(g) at every g; lambda_scale >= 1.
  DemandCurve scale(double lambda_scale) const;

  double intercept() const { return eval(0.0); }
  /// Smallest price with zero demand (+infinity when there is none).
  double choke_price() const;

  bool is_linear() const { return std::holds_alternative<Linear>(v_); }
  const Linear* as_linear() const { return std::get_if<Linear>(&v_); }
  const Exponential* as_exponential() const {
    return std::get_if<Exponential>(&v_);
  }
  std::string describe() const;

 private:
  explicit DemandCurve(std::variant<Linear, Exponential, Custom> v)
      : v_(std::move(v)) {}
  std::variant<Linear, Exponential, Custom> v_;
};

/// g D D'' + 2 D D' - 2 g (D')^2. A negative value at the equilibrium price
/// guarantees the marginal user share falls as capacity grows.
double mmus_condition(const DemandCurve& curve, double g);

/// D(g) = a * exp(-(1 - (1+g)^-2) / 2): strictly decreasing, yet the
/// curvature condition above turns positive once g^3 - 4g - 2 > 0.
DemandCurve curvature_counterexample(double a);

}  // namespace spamlab
