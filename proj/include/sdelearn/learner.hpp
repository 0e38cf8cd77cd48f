#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdelearn/closed_form.hpp"
#include "sdelearn/model.hpp"
#include "sdelearn/policy.hpp"
#include "sdelearn/time_grid.hpp"

namespace sdelearn {

struct DegenerateRegressorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IterationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// (state, realized control) pairs collected at one parameter knot interval.
struct SampleBatch {
  int knot_index = 0;
  double knot_time = 0.0;
  std::vector<double> x;
  std::vector<double> rho;
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
};

/// Least squares through the origin: slope = sum(x rho) / sum(x^2), standard
/// error from the residual variance. Throws DegenerateRegressorError when
/// sum(x^2) < 1e-12.
SlopeFit fit_mean_slope(const SampleBatch& batch);

/// Secondary estimator: mean of rho/x over samples with |x| >= min_abs_x.
/// Kept as a cross-check; the slope fit is the primary estimator.
double fit_ratio(const SampleBatch& batch, double min_abs_x = 0.1);

/// Per-knot parameter estimates with standard errors.
struct EstimateResult {
  std::vector<double> knot_times;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::vector<int> n_samples;

  ParamCurve curve(double t_end) const { return ParamCurve(knot_times, estimates, t_end); }
};

/// Simulates `episodes` randomized-control episodes under the case's optimal
/// policy (the environment knows the true parameters; the estimator sees only
/// (t, x, rho) triples), buckets samples by the tracked parameter's knot
/// intervals, and fits the mean slope per knot.
EstimateResult estimate_parameter(const CoefficientModel& model, const CaseParams& params,
                                  double lambda, const TimeGrid& grid, int episodes, double x0,
                                  std::uint64_t seed);

/// Collect-and-bucket step of estimate_parameter, exposed for tests.
std::vector<SampleBatch> collect_batches(const CoefficientModel& model, const CaseParams& params,
                                         double lambda, const TimeGrid& grid, int episodes,
                                         double x0, std::uint64_t seed);

/// Two-step recovery for the general case: step 1 estimates the diffusion
/// parameter (terminal-cost policy), step 2 the drift parameter
/// (tracking-cost policy). Step 1 completes before step 2 starts.
struct TwoStepEstimate {
  EstimateResult beta_hat;
  EstimateResult alpha_hat;
};
TwoStepEstimate two_step_estimate(const ParamCurve& alpha, const ParamCurve& beta, double lambda,
                                  const TimeGrid& grid, int episodes, double x0,
                                  std::uint64_t seed);

/// One policy-iteration sweep record: refit quadratic-value coefficients and
/// the policy mean slope, per knot, with the a1 fit standard errors.
struct PolicyIterTrace {
  std::vector<double> a1;
  std::vector<double> a1_std_error;
  std::vector<double> slope;
};

struct PolicyIterationResult {
  QuadraticValue value;
  GaussianPolicy policy;
  std::vector<PolicyIterTrace> trace;
};

/// Desk-scale policy iteration on the quadratic ansatz: Monte-Carlo policy
/// evaluation at symmetric probe states regressed onto {x^2, 1}, then a
/// Gaussian rebuild from the quadratic Hamiltonian of the refit value.
/// Aborts with IterationError when a refit a1 makes the Gibbs density
/// non-integrable (a1 <= 0 where the case needs a1 > 0), which signals too
/// few episodes.
PolicyIterationResult policy_iteration(const CoefficientModel& model, const CaseParams& params,
                                       double lambda, const TimeGrid& grid,
                                       int episodes_per_iter, int n_iters, std::uint64_t seed,
                                       const CaseSolution& init);

/// CSV export: knot_time,estimate,std_error,n_samples,true_value.
void write_estimates_csv(const EstimateResult& result, const ParamCurve& true_curve,
                         const std::string& path);

}  // namespace sdelearn
