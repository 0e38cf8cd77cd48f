#include "sdelearn/learner.hpp"

#include <algorithm>
#include <cmath>

#include "sdelearn/csv.hpp"
#include "sdelearn/gibbs.hpp"
#include "sdelearn/sim.hpp"

namespace sdelearn {

SlopeFit fit_mean_slope(const SampleBatch& batch) {
  const std::size_t n = batch.x.size();
  if (n == 0 || batch.rho.size() != n)
    throw std::invalid_argument("fit_mean_slope: need matching non-empty x and rho");
  double sxx = 0.0, sxr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += batch.x[i] * batch.x[i];
    sxr += batch.x[i] * batch.rho[i];
  }
  if (sxx < 1e-12)
    throw DegenerateRegressorError("fit_mean_slope: states are all near zero, slope unidentified");
  const double slope = sxr / sxx;
  if (n < 2) return {slope, 0.0};
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = batch.rho[i] - slope * batch.x[i];
    ss += r * r;
  }
  const double resid_var = ss / (static_cast<double>(n) - 1.0);
  return {slope, std::sqrt(resid_var / sxx)};
}

double fit_ratio(const SampleBatch& batch, double min_abs_x) {
  double sum = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < batch.x.size(); ++i) {
    if (std::abs(batch.x[i]) < min_abs_x) continue;
    sum += batch.rho[i] / batch.x[i];
    ++used;
  }
  if (used == 0)
    throw DegenerateRegressorError("fit_ratio: no samples above the |x| guard");
  return sum / used;
}

std::vector<SampleBatch> collect_batches(const CoefficientModel& model, const CaseParams& params,
                                         double lambda, const TimeGrid& grid, int episodes,
                                         double x0, std::uint64_t seed) {
  if (episodes < 100) throw std::domain_error("estimate_parameter: episodes must be >= 100");
  const CaseSolution sol = solve_case(model, params, lambda, grid);
  const PathBundle bundle =
      simulate(model, params, ControlLaw::randomized(sol.policy), x0, grid, episodes, seed);

  const std::vector<double>& knots = model.tracked_param(params).knots();
  std::vector<SampleBatch> batches(knots.size());
  for (std::size_t j = 0; j < knots.size(); ++j) {
    batches[j].knot_index = static_cast<int>(j);
    batches[j].knot_time = knots[j];
  }
  // Bucket index of each step once; all paths share the grid.
  std::vector<std::size_t> bucket(static_cast<std::size_t>(grid.n_steps()));
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.node(k);
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    bucket[static_cast<std::size_t>(k)] = static_cast<std::size_t>(it - knots.begin()) - 1;
  }
  for (int p = 0; p < episodes; ++p) {
    for (int k = 0; k < grid.n_steps(); ++k) {
      SampleBatch& b = batches[bucket[static_cast<std::size_t>(k)]];
      b.x.push_back(bundle.state(p, k));
      b.rho.push_back(bundle.control(p, k));
    }
  }
  return batches;
}

EstimateResult estimate_parameter(const CoefficientModel& model, const CaseParams& params,
                                  double lambda, const TimeGrid& grid, int episodes, double x0,
                                  std::uint64_t seed) {
  const std::vector<SampleBatch> batches =
      collect_batches(model, params, lambda, grid, episodes, x0, seed);
  EstimateResult result;
  for (const SampleBatch& batch : batches) {
    if (batch.x.size() < 30)
      throw std::domain_error("estimate_parameter: fewer than 30 samples at knot " +
                              std::to_string(batch.knot_time));
    const SlopeFit fit = fit_mean_slope(batch);
    result.knot_times.push_back(batch.knot_time);
    result.estimates.push_back(fit.slope);
    result.std_errors.push_back(fit.std_error);
    result.n_samples.push_back(static_cast<int>(batch.x.size()));
  }
  return result;
}

TwoStepEstimate two_step_estimate(const ParamCurve& alpha, const ParamCurve& beta, double lambda,
                                  const TimeGrid& grid, int episodes, double x0,
                                  std::uint64_t seed) {
  const CaseParams params{beta, alpha};
  TwoStepEstimate out;
  // Step 1 first: the diffusion parameter estimate is in hand before the
  // drift stage runs.
  out.beta_hat = estimate_parameter(CoefficientModel::general_step1(), params, lambda, grid,
                                    episodes, x0, seed);
  out.alpha_hat = estimate_parameter(CoefficientModel::general_step2(), params, lambda, grid,
                                     episodes, x0, seed + 0x9E3779B97F4A7C15ull);
  return out;
}

namespace {

const std::vector<double>& probe_states() {
  // Symmetric probes identify a1 without confounding from odd terms.
  static const std::vector<double> probes{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  return probes;
}

struct QuadFit {
  double a1 = 0.0;
  double a2 = 0.0;
  double a1_variance = 0.0;
};

// Least squares of J onto {x^2, 1} with per-point variances propagated into
// var(a1).
QuadFit fit_value_section(const std::vector<double>& x, const std::vector<double>& J,
                          const std::vector<double>& se) {
  const std::size_t n = x.size();
  double zbar = 0.0, jbar = 0.0;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = x[i] * x[i];
    zbar += z[i];
    jbar += J[i];
  }
  zbar /= static_cast<double>(n);
  jbar /= static_cast<double>(n);
  double szz = 0.0, szj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    szz += (z[i] - zbar) * (z[i] - zbar);
    szj += (z[i] - zbar) * (J[i] - jbar);
  }
  QuadFit fit;
  fit.a1 = szj / szz;
  fit.a2 = jbar - fit.a1 * zbar;
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = (z[i] - zbar) / szz;
    fit.a1_variance += weight * weight * se[i] * se[i];
  }
  return fit;
}

}  // namespace

PolicyIterationResult policy_iteration(const CoefficientModel& model, const CaseParams& params,
                                       double lambda, const TimeGrid& grid,
                                       int episodes_per_iter, int n_iters, std::uint64_t seed,
                                       const CaseSolution& init) {
  if (n_iters < 0) throw std::domain_error("policy_iteration: n_iters must be >= 0");
  const CostSpec cost = CostSpec::for_case(model, params, lambda);
  const bool needs_positive_a1 = !cost.running_uses_control;  // terminal-cost cases

  PolicyIterationResult result{init.value, init.policy, {}};
  const std::vector<double> knots = init.policy.mean_slope.knots();
  const double T = grid.T();
  const double dt = grid.dt();

  for (int iter = 0; iter < n_iters; ++iter) {
    // Evaluation: Monte-Carlo cost-to-go at probe states, refit (a1, a2).
    std::vector<double> a1_fit, a2_fit, a1_se, slope_fit, var_fit;
    for (std::size_t j = 0; j < knots.size(); ++j) {
      const double tj = knots[j];
      const int n_sub = std::max(1, static_cast<int>(std::lround((T - tj) / dt)));
      const TimeGrid subgrid(tj, T, n_sub);
      std::vector<double> J, se;
      for (std::size_t pi = 0; pi < probe_states().size(); ++pi) {
        const double xp = probe_states()[pi];
        const std::uint64_t run_seed =
            seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(iter + 1) +
            1000003ull * static_cast<std::uint64_t>(j) + static_cast<std::uint64_t>(pi);
        const PathBundle bundle = simulate(model, params, ControlLaw::randomized(result.policy),
                                           xp, subgrid, episodes_per_iter, run_seed);
        const CostEstimate est = evaluate_cost(bundle, cost, &result.policy);
        J.push_back(est.estimate);
        se.push_back(est.std_error);
      }
      const QuadFit fit = fit_value_section(probe_states(), J, se);
      if (needs_positive_a1 && !(fit.a1 > 0.0))
        throw IterationError(
            "policy_iteration: refit a1 <= 0 at knot " + std::to_string(tj) +
            "; the Gibbs density is non-integrable there (increase episodes_per_iter)");
      a1_fit.push_back(fit.a1);
      a2_fit.push_back(fit.a2);
      a1_se.push_back(std::sqrt(fit.a1_variance));
    }

    QuadraticValue refit;
    refit.a1 = TimeFunction::from_curve(ParamCurve(knots, a1_fit, T));
    refit.a2 = TimeFunction::from_curve(ParamCurve(knots, a2_fit, T));

    // Improvement: Gaussian rebuild from the quadratic Hamiltonian. The mean
    // is linear in x, so the slope is the mean at x = 1.
    for (std::size_t j = 0; j < knots.size(); ++j) {
      const HamiltonianQuad q = hamiltonian_quad(model, refit, cost, params, knots[j], 1.0);
      GaussianReduction red;
      try {
        red = gaussian_reduce(q.a, q.b, lambda);
      } catch (const std::domain_error&) {
        throw IterationError(
            "policy_iteration: non-integrable Gibbs density after refit at knot " +
            std::to_string(knots[j]) + " (increase episodes_per_iter)");
      }
      slope_fit.push_back(red.mean);
      var_fit.push_back(red.variance);
    }

    result.value = refit;
    result.policy.mean_slope = ParamCurve(knots, slope_fit, T);
    result.policy.variance = TimeFunction::from_curve(ParamCurve(knots, var_fit, T));
    result.trace.push_back({a1_fit, a1_se, slope_fit});
  }
  return result;
}

void write_estimates_csv(const EstimateResult& result, const ParamCurve& true_curve,
                         const std::string& path) {
  CsvWriter csv(path);
  csv.row({"knot_time", "estimate", "std_error", "n_samples", "true_value"});
  for (std::size_t j = 0; j < result.knot_times.size(); ++j)
    csv.row({fmt17(result.knot_times[j]), fmt17(result.estimates[j]),
             fmt17(result.std_errors[j]), std::to_string(result.n_samples[j]),
             fmt17(true_curve(result.knot_times[j]))});
  csv.close();
}

}  // namespace sdelearn
