#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "sdelearn/param_curve.hpp"

namespace sdelearn {

enum class ModelCase { DiffusionParam, DriftParam, General, Custom };

/// True parameter curves of a simulated environment. Single-parameter cases
/// read beta only; the General case also carries alpha.
struct CaseParams {
  ParamCurve beta;
  std::optional<ParamCurve> alpha;

  const ParamCurve& alpha_curve() const {
    if (!alpha) throw std::logic_error("CaseParams: alpha curve required for this case");
    return *alpha;
  }
};

/// Affine-in-control decomposition c0 + c1 * rho of a coefficient.
struct RhoAffine {
  double c0 = 0.0;
  double c1 = 0.0;
  double at(double rho) const { return c0 + c1 * rho; }
};

/// Coefficients of a quadratic c0 + c1 rho + c2 rho^2 in the control.
struct QuadRho {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double at(double rho) const { return c0 + rho * (c1 + rho * c2); }
};

/// Drift/diffusion pair of one controlled scalar SDE, together with the
/// control substitution that replaces parameter-times-state inside the
/// optimal feedback by a free control rho.
///
/// Named cases hard-wire the linear case studies; sub_drift/sub_diffusion
/// evaluate through the original coefficients at u_from_rho, so a feedback
/// run of the original system and a substituted run at the matching rho are
/// the same arithmetic, step for step.
class CoefficientModel {
 public:
  using CoeffFn = std::function<double(const CaseParams&, double t, double x, double c)>;

  static CoefficientModel diffusion_param();  // b = x + u,        sigma = beta x + u
  static CoefficientModel drift_param();      // b = beta x + u,   sigma = x + u
  static CoefficientModel general_step1();    // b = alpha x + u,  sigma = beta x + u
  static CoefficientModel general_step2();    // same dynamics, second cost functional

  /// Model given directly by substituted coefficients; no original system.
  static CoefficientModel custom(CoeffFn sub_drift, CoeffFn sub_diffusion);

  ModelCase tag() const { return tag_; }
  int stage() const { return stage_; }

  // Original controlled system (named cases only).
  double drift(const CaseParams& p, double t, double x, double u) const;
  double diffusion(const CaseParams& p, double t, double x, double u) const;

  /// Control substitution: the input control that realizes replacement
  /// control rho. Named cases: -x - rho, except stage 2 of the general case
  /// where u = -rho - beta_t x.
  double u_from_rho(const CaseParams& p, double t, double x, double rho) const;

  // Substituted system: coefficients as functions of the replacement control.
  double sub_drift(const CaseParams& p, double t, double x, double rho) const;
  double sub_diffusion(const CaseParams& p, double t, double x, double rho) const;

  // Hand-expanded affine forms of the substituted coefficients.
  bool has_affine() const { return tag_ != ModelCase::Custom; }
  RhoAffine sub_drift_affine(const CaseParams& p, double t, double x) const;
  RhoAffine sub_diffusion_affine(const CaseParams& p, double t, double x) const;

  /// Parameter curve that the optimal replacement control tracks: the mean
  /// of the optimal control density is tracked_param(t) * x.
  const ParamCurve& tracked_param(const CaseParams& p) const;

  /// Optimal replacement control in feedback form, tracked_param(t) * x.
  double optimal_rho(const CaseParams& p, double t, double x) const {
    return tracked_param(p)(t) * x;
  }

 private:
  CoefficientModel(ModelCase tag, int stage) : tag_(tag), stage_(stage) {}

  ModelCase tag_;
  int stage_;
  CoeffFn custom_sub_drift_;
  CoeffFn custom_sub_diffusion_;
};

/// Running + terminal cost with entropy temperature lambda.
struct CostSpec {
  double lambda;
  bool running_uses_control = false;
  std::function<double(double t, double x, double rho)> running;
  std::function<double(double x)> terminal;
  /// Quadratic-in-rho coefficients of the running cost, when available
  /// (needed for closed Gaussian moments).
  std::function<QuadRho(double t, double x)> running_quad;

  /// Cost functional paired with a case study: terminal x^2 when the tracked
  /// parameter sits in the diffusion, running tracking error squared when it
  /// sits in the drift.
  static CostSpec for_case(const CoefficientModel& model, const CaseParams& params,
                           double lambda);

  static CostSpec make(double lambda, bool running_uses_control,
                       std::function<double(double, double, double)> running,
                       std::function<double(double)> terminal,
                       std::function<QuadRho(double, double)> running_quad = nullptr);
};

}  // namespace sdelearn
