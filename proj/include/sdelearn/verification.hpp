#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdelearn/closed_form.hpp"
#include "sdelearn/model.hpp"
#include "sdelearn/policy.hpp"
#include "sdelearn/time_grid.hpp"

namespace sdelearn {

struct CheckRow {
  std::string statistic;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Result of one numerical check: named statistics, each with the tolerance
/// it was held to. pass is the conjunction over rows.
struct VerificationReport {
  std::string check;
  std::string grid;
  std::vector<CheckRow> rows;
  bool pass = true;

  void add_abs(const std::string& statistic, double value, double tolerance);
  /// For signed statistics that must not fall below -tolerance.
  void add_floor(const std::string& statistic, double value, double tolerance);
  double worst() const;
};

/// Residual of the exploratory HJB equation at the given (value, policy)
/// candidate over a (t, x) grid. The control integral is evaluated with
/// closed Gaussian moments; the time derivative by central difference with
/// step 1e-3, skipping nodes within two steps of a coefficient knot. A
/// case-specific reduced form of the equation is evaluated alongside as a
/// cross-check.
VerificationReport hjb_residual(const CoefficientModel& model, const CaseParams& params,
                                const QuadraticValue& value, const GaussianPolicy& policy,
                                double lambda, const std::vector<double>& t_grid,
                                const std::vector<double>& x_grid, double tolerance = 1e-4);

/// One-step moment match of the randomized-control scheme against the
/// policy-averaged drift and squared diffusion, at five probe times from
/// state x0. Drift reference b_tilde; second-moment reference
/// sigma_tilde^2 + b_tilde^2 dt. Passes when every z-score is within 3.
VerificationReport moment_match(const CoefficientModel& model, const CaseParams& params,
                                const GaussianPolicy& policy, double x0, const TimeGrid& grid,
                                int n_paths, std::uint64_t seed);

/// Temperature sweep: the density argmax must not move and variance/lambda
/// must stay constant as lambda decreases (concentration to a point mass).
VerificationReport dirac_limit(const CoefficientModel& model, const CaseParams& params,
                               const std::vector<double>& lambdas, double x, double t,
                               const TimeGrid& grid);

/// Cost comparison under common random numbers: every perturbed policy
/// (slope offsets, variance scales) must cost at least as much as the
/// optimal one, up to 3 pooled standard errors.
VerificationReport optimality_perturbation(const CoefficientModel& model,
                                           const CaseParams& params, double lambda, double x0,
                                           const TimeGrid& grid, int n_paths, std::uint64_t seed,
                                           const std::vector<double>& slope_offsets,
                                           const std::vector<double>& variance_scales);

/// CSV export: check,statistic,value,tolerance,pass.
void write_verification_csv(const std::vector<VerificationReport>& reports,
                            const std::string& path);

/// One line per report plus a final verdict line.
std::string summary_text(const std::vector<VerificationReport>& reports);

}  // namespace sdelearn
