#include "sdelearn/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdelearn/csv.hpp"
#include "sdelearn/gibbs.hpp"
#include "sdelearn/rng.hpp"
#include "sdelearn/sim.hpp"

namespace sdelearn {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTimeDiffStep = 1e-3;

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = v.size() > 1 ? std::sqrt(ss / (static_cast<double>(v.size()) - 1.0)) : 0.0;
  return {m, sd};
}

double z_score(const std::vector<double>& samples, double reference) {
  const MeanSd ms = mean_sd(samples);
  const double se = ms.sd / std::sqrt(static_cast<double>(samples.size()));
  if (se == 0.0) return ms.mean == reference ? 0.0 : std::numeric_limits<double>::infinity();
  return (ms.mean - reference) / se;
}

std::vector<double> knot_set(const CoefficientModel& model, const CaseParams& params,
                             const QuadraticValue& value, const GaussianPolicy& policy) {
  std::vector<double> knots = value.a1.knots();
  auto append = [&knots](const std::vector<double>& more) {
    knots.insert(knots.end(), more.begin(), more.end());
  };
  append(value.a2.knots());
  append(policy.variance.knots());
  const auto& bk = params.beta.knots();
  knots.insert(knots.end(), bk.begin() + 1, bk.end());
  if (model.tag() == ModelCase::General) {
    const auto& ak = params.alpha_curve().knots();
    knots.insert(knots.end(), ak.begin() + 1, ak.end());
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return knots;
}

// Reduced forms the full HJB collapses to at the optimal policy, one per
// case; used as an independent route to the same residual.
double reduced_residual(const CoefficientModel& model, const CaseParams& params, double lambda,
                        double dtv, double a1, double mu, double t, double x) {
  const double x2 = x * x;
  const double beta = params.beta(t);
  switch (model.tag()) {
    case ModelCase::DiffusionParam:
      return dtv + (beta - 1.0) * (beta - 1.0) * x2 * a1 - mu * mu * a1 -
             (lambda / 2.0) * std::log(kPi * lambda / a1);
    case ModelCase::DriftParam:
      return dtv + beta * beta * x2 + 2.0 * (beta - 1.0) * a1 * x2 - mu * mu * (1.0 + a1) -
             (lambda / 2.0) * std::log(kPi * lambda / (1.0 + a1));
    case ModelCase::General: {
      const double alpha = params.alpha_curve()(t);
      if (model.stage() == 1)
        return dtv + (beta - 1.0) * (beta - 1.0) * a1 * x2 + 2.0 * (alpha - 1.0) * a1 * x2 -
               mu * mu * a1 - (lambda / 2.0) * std::log(kPi * lambda / a1);
      return dtv + alpha * alpha * x2 + 2.0 * (alpha - beta) * a1 * x2 -
             mu * mu * (1.0 + a1) - (lambda / 2.0) * std::log(kPi * lambda / (1.0 + a1));
    }
    case ModelCase::Custom:
      break;
  }
  throw std::logic_error("hjb_residual: no reduced form for custom models");
}

}  // namespace

void VerificationReport::add_abs(const std::string& statistic, double value, double tolerance) {
  const bool ok = std::isfinite(value) && std::abs(value) <= tolerance;
  rows.push_back({statistic, value, tolerance, ok});
  pass = pass && ok;
}

void VerificationReport::add_floor(const std::string& statistic, double value, double tolerance) {
  const bool ok = std::isfinite(value) && value >= -tolerance;
  rows.push_back({statistic, value, tolerance, ok});
  pass = pass && ok;
}

double VerificationReport::worst() const {
  double w = 0.0;
  for (const auto& r : rows) w = std::max(w, std::abs(r.value));
  return w;
}

VerificationReport hjb_residual(const CoefficientModel& model, const CaseParams& params,
                                const QuadraticValue& value, const GaussianPolicy& policy,
                                double lambda, const std::vector<double>& t_grid,
                                const std::vector<double>& x_grid, double tolerance) {
  const CostSpec cost = CostSpec::for_case(model, params, lambda);
  const std::vector<double> knots = knot_set(model, params, value, policy);
  const double h = kTimeDiffStep;

  double max_full = 0.0;
  double max_reduced = 0.0;
  int skipped = 0;
  int evaluated = 0;
  for (double t : t_grid) {
    bool near = false;
    for (double k : knots)
      if (std::abs(t - k) < 2.0 * h) near = true;
    if (near) {
      ++skipped;
      continue;
    }
    const double vxx = value.vxx(t);
    const double a1 = 0.5 * vxx;
    const double w = policy.variance(t);
    const double ent = entropy_term(policy, t);
    for (double x : x_grid) {
      const double dtv = (value.v(t + h, x) - value.v(t - h, x)) / (2.0 * h);
      const double mu = policy.mean(t, x);
      const QuadRho f = cost.running_quad(t, x);
      const RhoAffine bd = model.sub_drift_affine(params, t, x);
      const RhoAffine sd = model.sub_diffusion_affine(params, t, x);
      const double ef = f.c0 + f.c1 * mu + f.c2 * (mu * mu + w);
      const double sm = sd.at(mu);
      const double es2 = sm * sm + sd.c1 * sd.c1 * w;
      const double full =
          dtv + ef + lambda * ent + 0.5 * es2 * vxx + bd.at(mu) * value.vx(t, x);
      max_full = std::max(max_full, std::abs(full));
      max_reduced = std::max(
          max_reduced, std::abs(reduced_residual(model, params, lambda, dtv, a1, mu, t, x)));
      ++evaluated;
    }
  }

  VerificationReport report;
  report.check = "hjb_residual";
  std::ostringstream grid;
  grid << t_grid.size() << "x" << x_grid.size() << " grid, " << evaluated << " nodes, "
       << skipped << " t-rows skipped near knots";
  report.grid = grid.str();
  report.add_abs("max_abs_residual", max_full, tolerance);
  report.add_abs("max_abs_residual_reduced_form", max_reduced, tolerance);
  return report;
}

VerificationReport moment_match(const CoefficientModel& model, const CaseParams& params,
                                const GaussianPolicy& policy, double x0, const TimeGrid& grid,
                                int n_paths, std::uint64_t seed) {
  if (n_paths < 10000) throw std::domain_error("moment_match: n_paths must be >= 1e4");
  const int n = grid.n_steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double probe_fractions[5] = {0.0, 0.25, 0.5, 0.75, 0.95};

  VerificationReport report;
  report.check = "moment_match";
  std::ostringstream grid_desc;
  grid_desc << "5 probes, n=" << n_paths << ", dt=" << dt << ", x=" << x0;
  report.grid = grid_desc.str();

  for (double frac : probe_fractions) {
    const int k = std::min(n - 1, static_cast<int>(frac * n));
    const double t = grid.node(k);
    const double mu = policy.mean(t, x0);
    const double sd_pol = policy.stddev(t);
    const RhoAffine bd = model.sub_drift_affine(params, t, x0);
    const RhoAffine sdiff = model.sub_diffusion_affine(params, t, x0);
    const double b_bar = bd.at(mu);
    const double s2_bar = sdiff.at(mu) * sdiff.at(mu) + sdiff.c1 * sdiff.c1 * sd_pol * sd_pol;

    std::vector<double> incr(static_cast<std::size_t>(n_paths));
    std::vector<double> incr2(static_cast<std::size_t>(n_paths));
    for (int i = 0; i < n_paths; ++i) {
      PathRng rng(seed, static_cast<std::uint64_t>(i));
      const double rho = mu + sd_pol * rng.normal(2ull * static_cast<std::uint64_t>(k) + 1ull);
      const double dw = sqrt_dt * rng.normal(2ull * static_cast<std::uint64_t>(k));
      const double dx = model.sub_drift(params, t, x0, rho) * dt +
                        model.sub_diffusion(params, t, x0, rho) * dw;
      incr[static_cast<std::size_t>(i)] = dx / dt;
      incr2[static_cast<std::size_t>(i)] = dx * dx / dt;
    }
    std::ostringstream tag;
    tag << "t=" << t;
    report.add_abs("drift_z_" + tag.str(), z_score(incr, b_bar), 3.0);
    report.add_abs("second_moment_z_" + tag.str(), z_score(incr2, s2_bar + b_bar * b_bar * dt),
                   3.0);
  }
  return report;
}

VerificationReport dirac_limit(const CoefficientModel& model, const CaseParams& params,
                               const std::vector<double>& lambdas, double x, double t,
                               const TimeGrid& grid) {
  if (lambdas.size() < 2) throw std::domain_error("dirac_limit: need at least two lambdas");
  std::vector<double> argmaxes;
  std::vector<double> ratios;
  for (double lambda : lambdas) {
    const CaseSolution sol = solve_case(model, params, lambda, grid);
    const CostSpec cost = CostSpec::for_case(model, params, lambda);
    const auto L = [&](double rho) {
      return hamiltonian(model, sol.value, cost, params, t, x, rho);
    };
    const GibbsDensity d = gibbs_density_auto(L, lambda);
    argmaxes.push_back(density_argmax(d));
    const HamiltonianQuad q = hamiltonian_quad(model, sol.value, cost, params, t, x);
    ratios.push_back(gaussian_reduce(q.a, q.b, lambda).variance / lambda);
  }
  const auto [am_lo, am_hi] = std::minmax_element(argmaxes.begin(), argmaxes.end());
  const auto [r_lo, r_hi] = std::minmax_element(ratios.begin(), ratios.end());

  VerificationReport report;
  report.check = "dirac_limit";
  std::ostringstream desc;
  desc << lambdas.size() << " temperatures at (t=" << t << ", x=" << x << ")";
  report.grid = desc.str();
  report.add_abs("argmax_drift", *am_hi - *am_lo, 1e-6);
  report.add_abs("argmax_vs_policy_mean", *am_hi - model.optimal_rho(params, t, x), 1e-6);
  report.add_abs("variance_over_lambda_relative_drift", (*r_hi - *r_lo) / std::abs(*r_hi), 1e-10);
  return report;
}

VerificationReport optimality_perturbation(const CoefficientModel& model,
                                           const CaseParams& params, double lambda, double x0,
                                           const TimeGrid& grid, int n_paths, std::uint64_t seed,
                                           const std::vector<double>& slope_offsets,
                                           const std::vector<double>& variance_scales) {
  const CaseSolution sol = solve_case(model, params, lambda, grid);
  const CostSpec cost = CostSpec::for_case(model, params, lambda);

  const auto cost_of = [&](const GaussianPolicy& pi) {
    const PathBundle bundle =
        simulate(model, params, ControlLaw::exploratory_mean(pi), x0, grid, n_paths, seed);
    return pathwise_costs(bundle, cost, &pi);
  };
  const std::vector<double> base = cost_of(sol.policy);

  VerificationReport report;
  report.check = "optimality_perturbation";
  std::ostringstream desc;
  desc << slope_offsets.size() + variance_scales.size() << " perturbations, n=" << n_paths
       << ", common random numbers";
  report.grid = desc.str();

  const auto compare = [&](const std::string& name, const GaussianPolicy& pi) {
    const std::vector<double> perturbed = cost_of(pi);
    std::vector<double> diff(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) diff[i] = perturbed[i] - base[i];
    const MeanSd ms = mean_sd(diff);
    const double se = ms.sd / std::sqrt(static_cast<double>(diff.size()));
    report.add_floor(name + "_excess_cost", ms.mean, 3.0 * se);
  };
  for (double offset : slope_offsets) {
    std::ostringstream name;
    name << "slope" << (offset >= 0 ? "+" : "") << offset;
    compare(name.str(), sol.policy.with_slope_offset(offset));
  }
  for (double scale : variance_scales) {
    std::ostringstream name;
    name << "variance_x" << scale;
    compare(name.str(), sol.policy.with_variance_scale(scale));
  }
  return report;
}

void write_verification_csv(const std::vector<VerificationReport>& reports,
                            const std::string& path) {
  CsvWriter csv(path);
  csv.row({"check", "statistic", "value", "tolerance", "pass"});
  for (const auto& report : reports)
    for (const auto& row : report.rows)
      csv.row({report.check, row.statistic, fmt17(row.value), fmt17(row.tolerance),
               row.pass ? "true" : "false"});
  csv.close();
}

std::string summary_text(const std::vector<VerificationReport>& reports) {
  std::ostringstream out;
  bool all = true;
  for (const auto& report : reports) {
    out << (report.pass ? "[PASS] " : "[FAIL] ") << report.check << " (" << report.grid << ")\n";
    for (const auto& row : report.rows)
      if (!row.pass)
        out << "       " << row.statistic << " = " << row.value << " vs tolerance "
            << row.tolerance << "\n";
    all = all && report.pass;
  }
  out << (all ? "all checks passed" : "some checks FAILED") << "\n";
  return out.str();
}

}  // namespace sdelearn
