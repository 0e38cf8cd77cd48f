#include <cmath>
#include <random>

#include "doctest.h"
#include "sdelearn/param_curve.hpp"
#include "sdelearn/time_grid.hpp"

using namespace sdelearn;

TEST_CASE("time grid nodes are exact at both ends and strictly increasing") {
  const TimeGrid grid(0.0, 1.0, 7);
  CHECK(grid.node(0) == 0.0);
  CHECK(grid.node(7) == 1.0);
  for (int k = 0; k < 7; ++k) CHECK(grid.node(k) < grid.node(k + 1));

  const TimeGrid odd(0.1, 2.3, 1000);
  CHECK(odd.node(1000) == 2.3);
  CHECK(odd.node(0) == 0.1);
}

TEST_CASE("time grid rejects bad arguments") {
  CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 10), std::domain_error);
  CHECK_THROWS_AS(TimeGrid(0.0, -1.0, 10), std::domain_error);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), std::domain_error);
}

TEST_CASE("curve evaluation is right-continuous piecewise constant") {
  const ParamCurve constant = ParamCurve::constant(0.0, 1.0, 0.3);
  CHECK(constant(0.7) == 0.3);

  const ParamCurve two({0.0, 0.5}, {0.2, 0.5}, 1.0);
  CHECK(two(0.5) == 0.5);     // right-continuous at the knot
  CHECK(two(0.4999) == 0.2);  // interval membership
  CHECK(two(1.0) == 0.5);     // last interval covers T

  CHECK_THROWS_AS(two(-0.1), std::domain_error);
  CHECK_THROWS_AS(two(1.1), std::domain_error);
}

TEST_CASE("curve construction invariants") {
  CHECK_THROWS_AS(ParamCurve({0.5, 0.5}, {1.0, 2.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ParamCurve({0.0, 0.5}, {1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ParamCurve({0.0, 2.0}, {1.0, 2.0}, 1.0), std::invalid_argument);
}

TEST_CASE("curve integral is exact") {
  const ParamCurve one = ParamCurve::constant(0.0, 1.0, 1.0);
  CHECK(one.integral(0.0, 1.0) == 1.0);

  const ParamCurve seesaw({0.0, 0.5}, {1.0, -1.0}, 1.0);
  CHECK(seesaw.integral(0.0, 1.0) == 0.0);

  const ParamCurve c = ParamCurve::constant(0.0, 1.0, 0.4);
  CHECK(c.integral(0.25, 0.75) == doctest::Approx(0.2).epsilon(1e-15));

  CHECK_THROWS_AS(one.integral(0.8, 0.2), std::domain_error);
}

TEST_CASE("curve integral additivity over random split points") {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const ParamCurve curve({0.0, 0.3, 0.55, 0.8}, {1.2, -0.7, 0.05, 2.0}, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    double a = unif(gen), b = unif(gen), c = unif(gen);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const double whole = curve.integral(a, c);
    const double split = curve.integral(a, b) + curve.integral(b, c);
    CHECK(whole == doctest::Approx(split).epsilon(1e-12));
  }
}

TEST_CASE("exp integral matches exact antiderivatives") {
  const ParamCurve half = ParamCurve::constant(0.0, 1.0, 0.5);
  const ParamCurve zero = half.map([](double b) { return 1.0 - 2.0 * b; });
  for (double t : {0.0, 0.3, 0.99}) CHECK(zero.exp_integral(t, 1.0) == 1.0);

  const ParamCurve one = ParamCurve::constant(0.0, 1.0, 1.0);
  CHECK(one.exp_integral(0.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));

  const ParamCurve seesaw({0.0, 0.5}, {1.0, -1.0}, 1.0);
  CHECK(seesaw.exp_integral(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exp integral is multiplicative over subintervals") {
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const ParamCurve curve({0.0, 0.2, 0.9}, {0.4, -1.5, 0.8}, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    double s = unif(gen), t = unif(gen);
    if (s > t) std::swap(s, t);
    const double product = curve.exp_integral(t, 1.0) * curve.exp_integral(s, t);
    CHECK(product == doctest::Approx(curve.exp_integral(s, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("curve combine merges knots pointwise") {
  const ParamCurve a({0.0, 0.5}, {0.2, 0.4}, 1.0);
  const ParamCurve b({0.0, 0.25}, {1.0, 2.0}, 1.0);
  const ParamCurve merged =
      ParamCurve::combine(a, b, [](double x, double y) { return 2.0 * (x - y) - 1.0; });
  CHECK(merged.knots().size() == 3);
  CHECK(merged(0.1) == 2.0 * (0.2 - 1.0) - 1.0);
  CHECK(merged(0.3) == 2.0 * (0.2 - 2.0) - 1.0);
  CHECK(merged(0.7) == 2.0 * (0.4 - 2.0) - 1.0);
}
