#include "sdelearn/model.hpp"

namespace sdelearn {

CoefficientModel CoefficientModel::diffusion_param() {
  return CoefficientModel(ModelCase::DiffusionParam, 1);
}
CoefficientModel CoefficientModel::drift_param() {
  return CoefficientModel(ModelCase::DriftParam, 1);
}
CoefficientModel CoefficientModel::general_step1() {
  return CoefficientModel(ModelCase::General, 1);
}
CoefficientModel CoefficientModel::general_step2() {
  return CoefficientModel(ModelCase::General, 2);
}

CoefficientModel CoefficientModel::custom(CoeffFn sub_drift, CoeffFn sub_diffusion) {
  CoefficientModel m(ModelCase::Custom, 1);
  m.custom_sub_drift_ = std::move(sub_drift);
  m.custom_sub_diffusion_ = std::move(sub_diffusion);
  return m;
}

double CoefficientModel::drift(const CaseParams& p, double t, double x, double u) const {
  switch (tag_) {
    case ModelCase::DiffusionParam:
      return x + u;
    case ModelCase::DriftParam:
      return p.beta(t) * x + u;
    case ModelCase::General:
      return p.alpha_curve()(t) * x + u;
    case ModelCase::Custom:
      break;
  }
  throw std::logic_error("CoefficientModel: custom case has no original coefficients");
}

double CoefficientModel::diffusion(const CaseParams& p, double t, double x, double u) const {
  switch (tag_) {
    case ModelCase::DiffusionParam:
    case ModelCase::General:
      return p.beta(t) * x + u;
    case ModelCase::DriftParam:
      return x + u;
    case ModelCase::Custom:
      break;
  }
  throw std::logic_error("CoefficientModel: custom case has no original coefficients");
}

double CoefficientModel::u_from_rho(const CaseParams& p, double t, double x, double rho) const {
  if (tag_ == ModelCase::Custom)
    throw std::logic_error("CoefficientModel: custom case has no control substitution");
  if (tag_ == ModelCase::General && stage_ == 2) return -rho - p.beta(t) * x;
  return -x - rho;
}

double CoefficientModel::sub_drift(const CaseParams& p, double t, double x, double rho) const {
  if (tag_ == ModelCase::Custom) return custom_sub_drift_(p, t, x, rho);
  return drift(p, t, x, u_from_rho(p, t, x, rho));
}

double CoefficientModel::sub_diffusion(const CaseParams& p, double t, double x, double rho) const {
  if (tag_ == ModelCase::Custom) return custom_sub_diffusion_(p, t, x, rho);
  return diffusion(p, t, x, u_from_rho(p, t, x, rho));
}

RhoAffine CoefficientModel::sub_drift_affine(const CaseParams& p, double t, double x) const {
  switch (tag_) {
    case ModelCase::DiffusionParam:
      return {0.0, -1.0};
    case ModelCase::DriftParam:
      return {(p.beta(t) - 1.0) * x, -1.0};
    case ModelCase::General:
      if (stage_ == 1) return {(p.alpha_curve()(t) - 1.0) * x, -1.0};
      return {(p.alpha_curve()(t) - p.beta(t)) * x, -1.0};
    case ModelCase::Custom:
      break;
  }
  throw std::logic_error("CoefficientModel: no affine form for custom case");
}

RhoAffine CoefficientModel::sub_diffusion_affine(const CaseParams& p, double t, double x) const {
  switch (tag_) {
    case ModelCase::DiffusionParam:
      return {(p.beta(t) - 1.0) * x, -1.0};
    case ModelCase::DriftParam:
      return {0.0, -1.0};
    case ModelCase::General:
      if (stage_ == 1) return {(p.beta(t) - 1.0) * x, -1.0};
      return {0.0, -1.0};
    case ModelCase::Custom:
      break;
  }
  throw std::logic_error("CoefficientModel: no affine form for custom case");
}

const ParamCurve& CoefficientModel::tracked_param(const CaseParams& p) const {
  if (tag_ == ModelCase::General && stage_ == 2) return p.alpha_curve();
  return p.beta;
}

CostSpec CostSpec::make(double lambda, bool running_uses_control,
                        std::function<double(double, double, double)> running,
                        std::function<double(double)> terminal,
                        std::function<QuadRho(double, double)> running_quad) {
  if (!(lambda > 0.0)) throw std::domain_error("CostSpec: lambda must be > 0");
  CostSpec spec;
  spec.lambda = lambda;
  spec.running_uses_control = running_uses_control;
  spec.running = std::move(running);
  spec.terminal = std::move(terminal);
  spec.running_quad = std::move(running_quad);
  return spec;
}

CostSpec CostSpec::for_case(const CoefficientModel& model, const CaseParams& params,
                            double lambda) {
  if (model.tag() == ModelCase::Custom)
    throw std::logic_error("CostSpec::for_case: custom models need an explicit cost");
  const bool terminal_case =
      model.tag() == ModelCase::DiffusionParam ||
      (model.tag() == ModelCase::General && model.stage() == 1);
  if (terminal_case) {
    return make(
        lambda, false, [](double, double, double) { return 0.0; },
        [](double x) { return x * x; },
        [](double, double) { return QuadRho{}; });
  }
  // Tracking cost (rho - c_t x)^2 where c is the parameter the stage estimates.
  const ParamCurve tracked = model.tracked_param(params);
  return make(
      lambda, true,
      [tracked](double t, double x, double rho) {
        const double d = rho - tracked(t) * x;
        return d * d;
      },
      [](double) { return 0.0; },
      [tracked](double t, double x) {
        const double cx = tracked(t) * x;
        return QuadRho{cx * cx, -2.0 * cx, 1.0};
      });
}

}  // namespace sdelearn
