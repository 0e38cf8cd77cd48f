#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "sdelearn/closed_form.hpp"
#include "sdelearn/gibbs.hpp"
#include "sdelearn/verification.hpp"

using namespace sdelearn;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = (double(n - 1 - i) * lo + double(i) * hi) / double(n - 1);
  return v;
}

CaseParams single(double beta) {
  return CaseParams{ParamCurve::constant(0.0, 1.0, beta), std::nullopt};
}

CaseParams both(double alpha, double beta) {
  return CaseParams{ParamCurve::constant(0.0, 1.0, beta),
                    ParamCurve::constant(0.0, 1.0, alpha)};
}

}  // namespace

TEST_CASE("closed-form solutions satisfy the HJB on every case") {
  const TimeGrid grid(0.0, 1.0, 100);
  const auto t_grid = linspace(0.02, 0.98, 30);
  const auto x_grid = linspace(-2.0, 2.0, 30);
  const double lambda = 0.1;

  const auto run = [&](const CoefficientModel& model, const CaseParams& params) {
    const CaseSolution sol = solve_case(model, params, lambda, grid);
    return hjb_residual(model, params, sol.value, sol.policy, lambda, t_grid, x_grid);
  };

  CHECK(run(CoefficientModel::diffusion_param(), single(0.3)).pass);
  CHECK(run(CoefficientModel::general_step1(), both(0.2, 0.4)).pass);
  CHECK(run(CoefficientModel::general_step2(), both(0.2, 0.4)).pass);

  // The drift-case a2 is linear in t, so the central difference is exact and
  // the residual is pure roundoff.
  const VerificationReport drift = run(CoefficientModel::drift_param(), single(0.5));
  CHECK(drift.pass);
  CHECK(drift.worst() < 1e-8);
}

TEST_CASE("a multiplicative a1 perturbation shifts the residual by (lambda/2) ln 1.1") {
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.25;
  const CaseParams params = single(0.3);
  const CoefficientModel model = CoefficientModel::diffusion_param();
  const CaseSolution sol = solve_case(model, params, lambda, grid);

  CaseSolution perturbed = sol;
  const TimeFunction base_a1 = sol.value.a1;
  perturbed.value.a1 =
      TimeFunction([base_a1](double t) { return 1.1 * base_a1(t); }, base_a1.knots());
  // Policy rebuilt from the perturbed value: slope unchanged, variance
  // lambda / (2 * 1.1 a1).
  const TimeFunction base_var = sol.policy.variance;
  perturbed.policy.variance =
      TimeFunction([base_var](double t) { return base_var(t) / 1.1; }, base_var.knots());

  const VerificationReport report =
      hjb_residual(model, params, perturbed.value, perturbed.policy, lambda,
                   linspace(0.02, 0.98, 20), linspace(-2.0, 2.0, 20));
  CHECK(!report.pass);
  const double expected = (lambda / 2.0) * std::log(1.1);
  CHECK(report.rows[0].value == doctest::Approx(expected).epsilon(1e-4));
  CHECK(report.rows[0].value > 1e-2);
}

TEST_CASE("a time-constant a1 bump leaves an x^2-shaped residual") {
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.1;
  const CaseParams params = single(0.3);
  const CoefficientModel model = CoefficientModel::diffusion_param();
  const CaseSolution sol = solve_case(model, params, lambda, grid);

  const double bump = 0.1;
  CaseSolution perturbed = sol;
  const TimeFunction base_a1 = sol.value.a1;
  perturbed.value.a1 =
      TimeFunction([base_a1, bump](double t) { return base_a1(t) + bump; }, base_a1.knots());
  perturbed.policy.variance = TimeFunction(
      [base_a1, bump, lambda](double t) { return lambda / (2.0 * (base_a1(t) + bump)); },
      base_a1.knots());

  // At x = 1 the residual is dominated by (1 - 2 beta) * bump = 0.04.
  const VerificationReport at_one =
      hjb_residual(model, params, perturbed.value, perturbed.policy, lambda,
                   linspace(0.02, 0.98, 20), {1.0});
  CHECK(at_one.rows[0].value >= 0.039);
  CHECK(at_one.rows[0].value <= 0.06);
}

TEST_CASE("grid rows touching a parameter knot are skipped and counted") {
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.1;
  const CaseParams params{ParamCurve({0.0, 0.5}, {0.2, 0.5}, 1.0), std::nullopt};
  const CoefficientModel model = CoefficientModel::diffusion_param();
  const CaseSolution sol = solve_case(model, params, lambda, grid);
  // 0.5 and a node just inside its exclusion window both get dropped.
  const VerificationReport report =
      hjb_residual(model, params, sol.value, sol.policy, lambda,
                   {0.2, 0.499, 0.5, 0.5015, 0.8}, linspace(-2.0, 2.0, 10));
  CHECK(report.pass);
  CHECK(report.grid.find("3 t-rows skipped") != std::string::npos);
}

TEST_CASE("one-step moments match the policy-averaged coefficients") {
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.1;
  const auto run = [&](const CoefficientModel& model, const CaseParams& params) {
    const CaseSolution sol = solve_case(model, params, lambda, grid);
    return moment_match(model, params, sol.policy, 1.0, grid, 20000, 9001);
  };
  CHECK(run(CoefficientModel::diffusion_param(), single(0.3)).pass);
  CHECK(run(CoefficientModel::drift_param(), single(0.5)).pass);
  CHECK(run(CoefficientModel::general_step1(), both(0.2, 0.4)).pass);
  CHECK(run(CoefficientModel::general_step2(), both(0.2, 0.4)).pass);

  const CaseSolution sol =
      solve_case(CoefficientModel::diffusion_param(), single(0.3), lambda, grid);
  CHECK_THROWS_AS(moment_match(CoefficientModel::diffusion_param(), single(0.3), sol.policy, 1.0,
                               grid, 100, 1),
                  std::domain_error);
}

TEST_CASE("a near-point-mass policy recovers the plain coefficients") {
  const TimeGrid grid(0.0, 1.0, 100);
  const CaseParams params = single(0.3);
  const GaussianPolicy dirac{ParamCurve::constant(0.0, 1.0, 0.3),
                             TimeFunction::constant(1e-12)};
  const VerificationReport report =
      moment_match(CoefficientModel::diffusion_param(), params, dirac, 1.0, grid, 20000, 5);
  CHECK(report.pass);
}

TEST_CASE("temperature sweep: argmax fixed, variance linear in lambda") {
  const TimeGrid grid(0.0, 1.0, 100);
  const std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4};
  const VerificationReport diffusion =
      dirac_limit(CoefficientModel::diffusion_param(), single(0.3), lambdas, 1.0, 0.37, grid);
  CHECK(diffusion.pass);

  const VerificationReport drift =
      dirac_limit(CoefficientModel::drift_param(), single(0.5), lambdas, 1.0, 0.37, grid);
  CHECK(drift.pass);

  // The drift-case ratio variance/lambda is exactly one half.
  for (double lambda : lambdas) {
    const CaseSolution sol = drift_case(ParamCurve::constant(0.0, 1.0, 0.5), lambda, grid);
    const CostSpec cost = CostSpec::for_case(CoefficientModel::drift_param(), single(0.5), lambda);
    const HamiltonianQuad q = hamiltonian_quad(CoefficientModel::drift_param(), sol.value, cost,
                                               single(0.5), 0.37, 1.0);
    CHECK(gaussian_reduce(q.a, q.b, lambda).variance / lambda == 0.5);
  }
}

TEST_CASE("perturbed policies never beat the optimal one") {
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.1;
  const CaseParams params = single(0.5);
  const VerificationReport report =
      optimality_perturbation(CoefficientModel::drift_param(), params, lambda, 1.0, grid, 20000,
                              777, {-0.1, -0.05, 0.05, 0.1}, {0.5, 2.0});
  CHECK(report.pass);
  // Every perturbation strictly increases the cost at this sample size.
  for (const CheckRow& row : report.rows) CHECK(row.value > 0.0);
}

TEST_CASE("zero perturbation changes nothing under common random numbers") {
  const TimeGrid grid(0.0, 1.0, 50);
  const VerificationReport report = optimality_perturbation(
      CoefficientModel::drift_param(), single(0.5), 0.1, 1.0, grid, 2000, 3, {0.0}, {});
  CHECK(report.rows.size() == 1);
  CHECK(report.rows[0].value == 0.0);
  CHECK(report.pass);
}

TEST_CASE("variance-scale excess cost matches the entropy trade-off exactly") {
  // For the drift case at the optimal slope, the pathwise cost difference of
  // a variance scale m is deterministic:
  //   T * ((m - 1) lambda / 2 - (lambda / 2) ln m).
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.1;
  const VerificationReport report = optimality_perturbation(
      CoefficientModel::drift_param(), single(0.5), lambda, 1.0, grid, 2000, 3, {}, {0.5, 2.0});
  const auto analytic = [&](double m) {
    return (m - 1.0) * lambda / 2.0 - (lambda / 2.0) * std::log(m);
  };
  CHECK(report.rows[0].value == doctest::Approx(analytic(0.5)).epsilon(1e-12));
  CHECK(report.rows[1].value == doctest::Approx(analytic(2.0)).epsilon(1e-12));
}

TEST_CASE("slope-offset excess cost tracks the second-moment ODE oracle") {
  const TimeGrid grid(0.0, 1.0, 100);
  const double lambda = 0.1, beta = 0.5, delta = 0.1, x0 = 1.0;
  const VerificationReport report = optimality_perturbation(
      CoefficientModel::drift_param(), single(beta), lambda, x0, grid, 100000, 41, {delta}, {});

  // Oracle: excess = delta^2 int m2(s) ds with
  // m2' = (2(beta - 1 - c) + c^2) m2 + c^2 var + var... under the perturbed
  // exploratory dynamics, c = beta + delta, var = lambda / 2.
  const double c = beta + delta, w = lambda / 2.0;
  const int steps = 200000;
  const double h = 1.0 / steps;
  double m2 = x0 * x0, integral = 0.0;
  const auto f = [&](double y) { return (2.0 * (beta - 1.0 - c) + c * c) * y + w; };
  for (int i = 0; i < steps; ++i) {
    integral += h * m2;  // left rectangle matches the cost quadrature
    const double k1 = f(m2);
    const double k2 = f(m2 + 0.5 * h * k1);
    const double k3 = f(m2 + 0.5 * h * k2);
    const double k4 = f(m2 + h * k3);
    m2 += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double oracle = delta * delta * integral;
  const double se = report.rows[0].tolerance / 3.0;
  CHECK(std::abs(report.rows[0].value - oracle) < 3.0 * se + 3e-4);
}

TEST_CASE("verification CSV and summary") {
  VerificationReport report;
  report.check = "demo";
  report.grid = "none";
  report.add_abs("alpha", 0.5, 1.0);
  report.add_abs("beta", 2.0, 1.0);
  CHECK(!report.pass);
  const std::string path = "test_verify_out.csv";
  write_verification_csv({report}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "check,statistic,value,tolerance,pass");
  std::getline(in, line);
  CHECK(line == "demo,alpha,0.5,1,true");
  std::getline(in, line);
  CHECK(line == "demo,beta,2,1,false");
  std::remove(path.c_str());
  const std::string summary = summary_text({report});
  CHECK(summary.find("[FAIL] demo") != std::string::npos);
}
