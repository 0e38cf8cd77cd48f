#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sdelearn/param_curve.hpp"

namespace sdelearn {

/// Scalar function of time, evaluable anywhere on its domain, with a list of
/// interior knots where it may fail to be differentiable. Closed-form
/// coefficient curves (exponentials of piecewise-linear integrals) are smooth
/// between parameter knots but kinked at them; derivative checks need to know
/// where the kinks are.
class TimeFunction {
 public:
  TimeFunction() : fn_([](double) { return 0.0; }) {}
  TimeFunction(std::function<double(double)> fn, std::vector<double> knots = {})
      : fn_(std::move(fn)), knots_(std::move(knots)) {}

  static TimeFunction constant(double c) {
    return TimeFunction([c](double) { return c; });
  }

  static TimeFunction from_curve(const ParamCurve& curve) {
    return TimeFunction([curve](double t) { return curve(t); }, curve.knots());
  }

  double operator()(double t) const { return fn_(t); }
  const std::vector<double>& knots() const { return knots_; }

  bool near_knot(double t, double window) const {
    for (double k : knots_)
      if (std::abs(t - k) < window) return true;
    return false;
  }

 private:
  std::function<double(double)> fn_;
  std::vector<double> knots_;
};

/// Time-indexed Gaussian control density: at (t, x) the control is
/// N(mean_slope(t) * x, variance(t)). The slope is piecewise constant; the
/// variance may vary smoothly in t.
struct GaussianPolicy {
  ParamCurve mean_slope;
  TimeFunction variance;

  double mean(double t, double x) const { return mean_slope(t) * x; }
  double stddev(double t) const {
    const double v = variance(t);
    if (!(v > 0.0)) throw std::domain_error("GaussianPolicy: variance must be > 0");
    return std::sqrt(v);
  }

  GaussianPolicy with_slope_offset(double delta) const {
    return {mean_slope.map([delta](double s) { return s + delta; }), variance};
  }
  GaussianPolicy with_variance_scale(double factor) const {
    TimeFunction base = variance;
    return {mean_slope,
            TimeFunction([base, factor](double t) { return factor * base(t); }, base.knots())};
  }
};

/// Value-function ansatz v(t, x) = a1(t) x^2 + a2(t) with its spatial
/// derivatives in closed form.
struct QuadraticValue {
  TimeFunction a1;
  TimeFunction a2;

  double v(double t, double x) const { return a1(t) * x * x + a2(t); }
  double vx(double t, double x) const { return 2.0 * a1(t) * x; }
  double vxx(double t) const { return 2.0 * a1(t); }
};

}  // namespace sdelearn
