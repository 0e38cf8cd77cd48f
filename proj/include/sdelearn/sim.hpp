#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdelearn/model.hpp"
#include "sdelearn/policy.hpp"
#include "sdelearn/time_grid.hpp"

namespace sdelearn {

/// Simulated state paths with the Brownian increments that produced them and,
/// where the control law realizes one, the replacement controls. Immutable
/// once returned from simulate().
struct PathBundle {
  TimeGrid grid;
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> states;    // n_paths rows of (n_steps + 1) columns
  std::vector<double> noise;     // n_paths rows of n_steps columns
  std::vector<double> controls;  // same shape as noise, or empty

  double state(int path, int k) const {
    return states[static_cast<std::size_t>(path) * (grid.n_steps() + 1) + k];
  }
  double noise_at(int path, int k) const {
    return noise[static_cast<std::size_t>(path) * grid.n_steps() + k];
  }
  bool has_controls() const { return !controls.empty(); }
  double control(int path, int k) const {
    return controls[static_cast<std::size_t>(path) * grid.n_steps() + k];
  }
};

struct SimulationError : std::runtime_error {
  SimulationError(int path, int step)
      : std::runtime_error("non-finite state at path " + std::to_string(path) + ", step " +
                           std::to_string(step)),
        path(path),
        step(step) {}
  int path;
  int step;
};

/// How controls are produced while stepping:
///   FeedbackU         u_k = fn(t_k, X_k), through the original coefficients
///   FeedbackRho       rho_k = fn(t_k, X_k), through the substituted ones
///   SubstitutedCurve  rho_k = curve(t_k)
///   Randomized        rho_k drawn fresh from the policy at every (path, step)
///   ExploratoryMean   state driven by the policy-averaged drift and the
///                     root of the policy-averaged squared diffusion
class ControlLaw {
 public:
  enum class Kind { FeedbackU, FeedbackRho, SubstitutedCurve, Randomized, ExploratoryMean };

  static ControlLaw feedback_u(std::function<double(double, double)> u);
  static ControlLaw feedback_rho(std::function<double(double, double)> rho);
  static ControlLaw substituted_curve(ParamCurve rho);
  static ControlLaw randomized(GaussianPolicy pi);
  static ControlLaw exploratory_mean(GaussianPolicy pi);

  Kind kind() const { return kind_; }
  const std::function<double(double, double)>& feedback() const { return feedback_; }
  const ParamCurve& curve() const { return *curve_; }
  const GaussianPolicy& policy() const { return *policy_; }

 private:
  explicit ControlLaw(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::function<double(double, double)> feedback_;
  std::optional<ParamCurve> curve_;
  std::optional<GaussianPolicy> policy_;
};

/// Euler-Maruyama over the grid: X_{k+1} = X_k + b dt + s dW_k, with the
/// coefficient pair selected by the law. Deterministic function of
/// (seed, n_paths, grid) for any worker count; Randomized draws one control
/// per path per step and records it.
PathBundle simulate(const CoefficientModel& model, const CaseParams& params,
                    const ControlLaw& law, double x0, const TimeGrid& grid, int n_paths,
                    std::uint64_t seed);

/// Same stepping, but only terminal states are kept (for large-n moment
/// studies that would not fit in memory as full bundles).
std::vector<double> simulate_terminal(const CoefficientModel& model, const CaseParams& params,
                                      const ControlLaw& law, double x0, const TimeGrid& grid,
                                      int n_paths, std::uint64_t seed);

struct CostEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Per-path cost: running cost by left-endpoint rectangle rule plus terminal
/// cost. With a policy present the entropy penalty lambda * int(pi ln pi) is
/// added per step, and a running cost that needs a control falls back to its
/// closed Gaussian moment when the bundle has no recorded controls.
std::vector<double> pathwise_costs(const PathBundle& bundle, const CostSpec& cost,
                                   const GaussianPolicy* policy = nullptr);

/// Sample mean and standard error of pathwise_costs.
CostEstimate evaluate_cost(const PathBundle& bundle, const CostSpec& cost,
                           const GaussianPolicy* policy = nullptr);

/// Discrete check of the substitution identity: the original system under the
/// optimal feedback and the substituted system under the matching replacement
/// feedback, driven by identical noise. Returns the max absolute state
/// difference over all paths and steps; the two recursions are algebraically
/// identical, so the expected value is exactly zero.
double path_equivalence(const CoefficientModel& model, const CaseParams& params, double x0,
                        const TimeGrid& grid, int n_paths, std::uint64_t seed);

/// CSV export: header path,step,time,state[,control]; one row per (path,
/// step); control column only when the bundle recorded controls (empty on
/// the terminal row of each path).
void write_paths_csv(const PathBundle& bundle, const std::string& path);

/// Worker count for path-parallel loops: SDELEARN_THREADS if set, else the
/// hardware concurrency, at least 1.
int thread_count();

}  // namespace sdelearn
