#pragma once

#include <functional>
#include <string>

#include "sdelearn/model.hpp"
#include "sdelearn/policy.hpp"
#include "sdelearn/time_grid.hpp"

namespace sdelearn {

/// Exact value function and optimal Gaussian control density of one case.
struct CaseSolution {
  QuadraticValue value;
  GaussianPolicy policy;
};

/// Unknown parameter in the diffusion: value (a1, a2) with
/// a1(t) = exp(int_t^T (1 - 2 beta_s) ds), a2 solving
/// a2'(t) = (lambda/2) ln(pi lambda / a1(t)), a2(T) = 0; optimal density
/// N(beta_t x, lambda / (2 a1(t))).
CaseSolution diffusion_case(const ParamCurve& beta, double lambda, const TimeGrid& grid);

/// Unknown parameter in the drift: a1 = 0,
/// a2(t) = -(lambda/2)(T - t) ln(pi lambda); optimal density
/// N(beta_t x, lambda/2).
CaseSolution drift_case(const ParamCurve& beta, double lambda, const TimeGrid& grid);

/// Both coefficients unknown; two-step solution. Step 1 (terminal cost)
/// estimates beta: a1 = exp(int [2(alpha - beta) - 1]), density
/// N(beta_t x, lambda/(2 a1)). Step 2 (tracking cost) estimates alpha:
/// density N(alpha_t x, lambda/2).
struct TwoStepSolution {
  CaseSolution step1;
  CaseSolution step2;
};
TwoStepSolution general_case(const ParamCurve& alpha, const ParamCurve& beta, double lambda,
                             const TimeGrid& grid);

/// Classical (unrandomized) control problem behind the diffusion case:
/// value b1(t) x^2 with b1 = exp(int (1 - 2 beta)), optimal feedback
/// rho*(t, x) = beta_t x.
struct ClassicalSolution {
  QuadraticValue value;
  std::function<double(double, double)> feedback;
};
ClassicalSolution classical_solution(const ParamCurve& beta, const TimeGrid& grid);

/// Closed form matching a named model instance.
CaseSolution solve_case(const CoefficientModel& model, const CaseParams& params, double lambda,
                        const TimeGrid& grid);

/// CSV export on the grid nodes: t,alpha1,alpha2,mean_slope,variance.
void write_policy_curves_csv(const CaseSolution& sol, const TimeGrid& grid,
                             const std::string& path);

}  // namespace sdelearn
