#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace sdelearn {

/// Right-continuous piecewise-constant function of time on [t0, t_end].
/// values[i] holds on [knots[i], knots[i+1]); values.back() holds on
/// [knots.back(), t_end], including t_end itself.
///
/// Integrals of such curves are sums of value * overlap-length, so the
/// calculus here is exact up to rounding.
class ParamCurve {
 public:
  ParamCurve(std::vector<double> knots, std::vector<double> values, double t_end);

  static ParamCurve constant(double t0, double t_end, double value);

  /// Value at time t. Throws std::domain_error outside [t0, t_end].
  double operator()(double t) const;

  /// Exact integral over [a, b] for t0 <= a <= b <= t_end.
  double integral(double a, double b) const;

  /// exp of the exact integral over [a, b]; strictly positive.
  double exp_integral(double a, double b) const { return std::exp(integral(a, b)); }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double t0() const { return knots_.front(); }
  double t_end() const { return t_end_; }

  /// New curve with the same knots and fn applied to each value.
  ParamCurve map(const std::function<double(double)>& fn) const;

  /// Pointwise combination on the merged knot set of a and b.
  static ParamCurve combine(const ParamCurve& a, const ParamCurve& b,
                            const std::function<double(double, double)>& fn);

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double t_end_;
};

}  // namespace sdelearn
