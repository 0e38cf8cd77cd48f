#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sdelearn/closed_form.hpp"
#include "sdelearn/model.hpp"
#include "sdelearn/sim.hpp"

using namespace sdelearn;

namespace {

CoefficientModel pure_decay() {
  // b = -rho, s = 0: deterministic linear decay under a constant control.
  return CoefficientModel::custom(
      [](const CaseParams&, double, double, double rho) { return -rho; },
      [](const CaseParams&, double, double, double) { return 0.0; });
}

CaseParams beta_only(double beta) {
  return CaseParams{ParamCurve::constant(0.0, 1.0, beta), std::nullopt};
}

CaseParams general_params(double alpha, double beta) {
  return CaseParams{ParamCurve::constant(0.0, 1.0, beta),
                    ParamCurve::constant(0.0, 1.0, alpha)};
}

// Fine-step RK4 for dm/dt = (beta - 1) m - rho, the mean equation of the
// drift-parameter substituted dynamics under a constant control.
double mean_ode_oracle(double beta, double rho, double x0, double T) {
  const int steps = 100000;
  const double h = T / steps;
  double m = x0;
  const auto f = [&](double y) { return (beta - 1.0) * y - rho; };
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(m);
    const double k2 = f(m + 0.5 * h * k1);
    const double k3 = f(m + 0.5 * h * k2);
    const double k4 = f(m + h * k3);
    m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return m;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_se(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("constant decay hits 0.5 exactly on a dyadic grid") {
  const TimeGrid grid(0.0, 1.0, 4);
  const ParamCurve rho = ParamCurve::constant(0.0, 1.0, 0.5);
  const PathBundle bundle = simulate(pure_decay(), beta_only(0.0),
                                     ControlLaw::substituted_curve(rho), 1.0, grid, 32, 1);
  for (int p = 0; p < bundle.n_paths; ++p) CHECK(bundle.state(p, 4) == 0.5);
}

TEST_CASE("zero coefficients freeze the state") {
  const CoefficientModel frozen = CoefficientModel::custom(
      [](const CaseParams&, double, double, double) { return 0.0; },
      [](const CaseParams&, double, double, double) { return 0.0; });
  const TimeGrid grid(0.0, 1.0, 1);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), std::domain_error);
  const PathBundle bundle =
      simulate(frozen, beta_only(0.0),
               ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, 0.0)), 2.0, grid, 8, 1);
  for (int p = 0; p < 8; ++p) {
    CHECK(bundle.state(p, 0) == 2.0);
    CHECK(bundle.state(p, 1) == 2.0);
  }
}

TEST_CASE("drift-parameter mean matches the moment ODE within 3 standard errors") {
  const double beta = 0.5, rho_const = 0.5;
  const TimeGrid grid(0.0, 1.0, 1000);
  const std::vector<double> terminal = simulate_terminal(
      CoefficientModel::drift_param(), beta_only(beta),
      ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, rho_const)), 1.0, grid,
      100000, 2024);
  const double oracle = mean_ode_oracle(beta, rho_const, 1.0, 1.0);
  CHECK(std::abs(sample_mean(terminal) - oracle) < 3.0 * sample_se(terminal));
}

TEST_CASE("noise increments are centered per step") {
  const TimeGrid grid(0.0, 1.0, 50);
  const PathBundle bundle =
      simulate(pure_decay(), beta_only(0.0),
               ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, 0.1)), 1.0, grid,
               10000, 77);
  const double bound = 5.0 * std::sqrt(grid.dt() / bundle.n_paths);
  for (int k = 0; k < grid.n_steps(); ++k) {
    double mean = 0.0;
    for (int p = 0; p < bundle.n_paths; ++p) mean += bundle.noise_at(p, k);
    mean /= bundle.n_paths;
    CHECK(std::abs(mean) < bound);
  }
  for (int p = 0; p < bundle.n_paths; ++p) CHECK(bundle.state(p, 0) == 1.0);
}

TEST_CASE("bundles are bit-identical across runs and worker counts") {
  const TimeGrid grid(0.0, 1.0, 64);
  const CaseSolution sol = diffusion_case(ParamCurve::constant(0.0, 1.0, 0.3), 0.1, grid);
  const auto run = [&] {
    return simulate(CoefficientModel::diffusion_param(), beta_only(0.3),
                    ControlLaw::randomized(sol.policy), 1.0, grid, 257, 4242);
  };
  setenv("SDELEARN_THREADS", "1", 1);
  const PathBundle serial = run();
  setenv("SDELEARN_THREADS", "5", 1);
  const PathBundle parallel = run();
  unsetenv("SDELEARN_THREADS");
  const PathBundle again = run();
  CHECK(serial.states == parallel.states);
  CHECK(serial.noise == parallel.noise);
  CHECK(serial.controls == parallel.controls);
  CHECK(serial.states == again.states);
}

TEST_CASE("Euler weak error roughly halves with the step for x-independent diffusion") {
  const double beta = 0.5, rho_const = 0.5;
  const double exact = 2.0 * std::exp(-0.5) - 1.0;
  const auto bias_at = [&](int steps, std::uint64_t seed) {
    const TimeGrid grid(0.0, 1.0, steps);
    const std::vector<double> terminal = simulate_terminal(
        CoefficientModel::drift_param(), beta_only(beta),
        ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, rho_const)), 1.0, grid,
        1000000, seed);
    return sample_mean(terminal) - exact;
  };
  const double coarse = bias_at(20, 1001);
  const double fine = bias_at(40, 1002);
  const double ratio = fine / coarse;
  CHECK(ratio > 0.3);
  CHECK(ratio < 0.7);
}

TEST_CASE("evaluate_cost handles constant and frozen cases exactly") {
  const CoefficientModel frozen = CoefficientModel::custom(
      [](const CaseParams&, double, double, double) { return 0.0; },
      [](const CaseParams&, double, double, double) { return 0.0; });
  const TimeGrid grid(0.0, 1.0, 8);
  const PathBundle bundle =
      simulate(frozen, beta_only(0.0),
               ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, 0.0)), 2.0, grid,
               64, 5);

  const CostSpec unit_cost = CostSpec::make(
      0.1, false, [](double, double, double) { return 0.0; }, [](double) { return 1.0; });
  const CostEstimate one = evaluate_cost(bundle, unit_cost);
  CHECK(one.estimate == 1.0);
  CHECK(one.std_error == 0.0);

  const CostSpec quad_cost = CostSpec::make(
      0.1, false, [](double, double, double) { return 0.0; }, [](double x) { return x * x; });
  const CostEstimate four = evaluate_cost(bundle, quad_cost);
  CHECK(four.estimate == 4.0);
  CHECK(four.std_error == 0.0);
}

TEST_CASE("cost at the classical optimum matches the closed-form value") {
  const double beta = 0.3, x0 = 1.0;
  const TimeGrid grid(0.0, 1.0, 100);
  const CaseParams params = beta_only(beta);
  const CoefficientModel model = CoefficientModel::diffusion_param();
  const ClassicalSolution classical = classical_solution(params.beta, grid);
  const PathBundle bundle = simulate(model, params, ControlLaw::feedback_rho(classical.feedback),
                                     x0, grid, 20000, 31337);
  const CostSpec cost = CostSpec::for_case(model, params, 0.1);
  const CostEstimate est = evaluate_cost(bundle, cost);
  const double expected = classical.value.v(0.0, x0);
  CHECK(expected == doctest::Approx(std::exp(0.4)).epsilon(1e-12));
  // Allow the O(dt) weak bias on top of the Monte-Carlo band.
  CHECK(std::abs(est.estimate - expected) < 3.0 * est.std_error + 2e-3);
}

TEST_CASE("running cost needs controls or a policy") {
  const TimeGrid grid(0.0, 1.0, 4);
  const CaseParams params = beta_only(0.5);
  const CoefficientModel model = CoefficientModel::drift_param();
  const CaseSolution sol = drift_case(params.beta, 0.1, grid);
  const PathBundle no_controls =
      simulate(model, params, ControlLaw::exploratory_mean(sol.policy), 1.0, grid, 16, 9);
  const CostSpec cost = CostSpec::for_case(model, params, 0.1);
  CHECK(!no_controls.has_controls());
  CHECK_THROWS_AS(evaluate_cost(no_controls, cost), std::logic_error);
  // With the policy the running cost falls back to its closed Gaussian moment.
  CHECK_NOTHROW(evaluate_cost(no_controls, cost, &sol.policy));
}

TEST_CASE("path equivalence is exactly zero for every named case") {
  const TimeGrid grid(0.0, 1.0, 100);
  SUBCASE("diffusion parameter") {
    CHECK(path_equivalence(CoefficientModel::diffusion_param(), beta_only(0.3), 1.0, grid, 100,
                           7) == 0.0);
  }
  SUBCASE("drift parameter") {
    CHECK(path_equivalence(CoefficientModel::drift_param(), beta_only(0.5), 1.0, grid, 100, 7) ==
          0.0);
  }
  SUBCASE("general case, both steps") {
    const CaseParams params = general_params(0.2, 0.4);
    CHECK(path_equivalence(CoefficientModel::general_step1(), params, 1.0, grid, 100, 7) == 0.0);
    CHECK(path_equivalence(CoefficientModel::general_step2(), params, 1.0, grid, 100, 7) == 0.0);
  }
}

TEST_CASE("non-finite states abort with path and step") {
  const CoefficientModel exploding = CoefficientModel::custom(
      [](const CaseParams&, double, double, double) { return 1e308; },
      [](const CaseParams&, double, double, double) { return 0.0; });
  const TimeGrid grid(0.0, 1.0, 2);
  try {
    simulate(exploding, beta_only(0.0),
             ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, 0.0)), 1e308, grid, 3,
             1);
    FAIL("expected SimulationError");
  } catch (const SimulationError& e) {
    CHECK(e.step == 1);  // the first step still lands under the overflow threshold
    CHECK(std::string(e.what()).find("path") != std::string::npos);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("randomized laws reject non-positive variance on the grid") {
  const TimeGrid grid(0.0, 1.0, 4);
  const GaussianPolicy flat{ParamCurve::constant(0.0, 1.0, 0.3), TimeFunction::constant(0.0)};
  CHECK_THROWS_AS(simulate(CoefficientModel::diffusion_param(), beta_only(0.3),
                           ControlLaw::randomized(flat), 1.0, grid, 4, 1),
                  std::domain_error);
  CHECK_THROWS_AS(simulate(CoefficientModel::diffusion_param(), beta_only(0.3),
                           ControlLaw::exploratory_mean(flat), 1.0, grid, 4, 1),
                  std::domain_error);
  CHECK_THROWS_AS(simulate(CoefficientModel::diffusion_param(), beta_only(0.3),
                           ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, 0.3)),
                           1.0, grid, 0, 1),
                  std::domain_error);
}

TEST_CASE("randomized bundles record the realized controls") {
  const TimeGrid grid(0.0, 1.0, 16);
  const CaseParams params = beta_only(0.5);
  const CaseSolution sol = drift_case(params.beta, 0.2, grid);
  const PathBundle bundle = simulate(CoefficientModel::drift_param(), params,
                                     ControlLaw::randomized(sol.policy), 1.0, grid, 50, 99);
  REQUIRE(bundle.has_controls());
  // Controls vary across paths and steps.
  CHECK(bundle.control(0, 0) != bundle.control(1, 0));
  CHECK(bundle.control(0, 0) != bundle.control(0, 1));
}

TEST_CASE("paths CSV export is byte-stable") {
  const TimeGrid grid(0.0, 1.0, 2);
  const PathBundle bundle =
      simulate(pure_decay(), beta_only(0.0),
               ControlLaw::substituted_curve(ParamCurve::constant(0.0, 1.0, 0.5)), 1.0, grid, 1,
               1);
  const std::string path = "test_paths_out.csv";
  write_paths_csv(bundle, path);
  std::ifstream in(path, std::ios::binary);
  std::ostringstream content;
  content << in.rdbuf();
  CHECK(content.str() ==
        "path,step,time,state,control\n"
        "0,0,0,1,0.5\n"
        "0,1,0.5,0.75,0.5\n"
        "0,2,1,0.5,\n");
  std::remove(path.c_str());
}
