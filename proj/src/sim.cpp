#include "sdelearn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include "sdelearn/csv.hpp"
#include "sdelearn/rng.hpp"

namespace sdelearn {

ControlLaw ControlLaw::feedback_u(std::function<double(double, double)> u) {
  ControlLaw law(Kind::FeedbackU);
  law.feedback_ = std::move(u);
  return law;
}
ControlLaw ControlLaw::feedback_rho(std::function<double(double, double)> rho) {
  ControlLaw law(Kind::FeedbackRho);
  law.feedback_ = std::move(rho);
  return law;
}
ControlLaw ControlLaw::substituted_curve(ParamCurve rho) {
  ControlLaw law(Kind::SubstitutedCurve);
  law.curve_ = std::move(rho);
  return law;
}
ControlLaw ControlLaw::randomized(GaussianPolicy pi) {
  ControlLaw law(Kind::Randomized);
  law.policy_ = std::move(pi);
  return law;
}
ControlLaw ControlLaw::exploratory_mean(GaussianPolicy pi) {
  ControlLaw law(Kind::ExploratoryMean);
  law.policy_ = std::move(pi);
  return law;
}

int thread_count() {
  if (const char* env = std::getenv("SDELEARN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace {

void parallel_paths(int n_paths, const std::function<void(int, int)>& run_range) {
  const int workers = std::min(thread_count(), n_paths);
  if (workers <= 1) {
    run_range(0, n_paths);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const int chunk = (n_paths + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n_paths, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        if (lo < hi) run_range(lo, hi);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

void validate_policy_on_grid(const GaussianPolicy& pi, const TimeGrid& grid) {
  for (int k = 0; k < grid.n_steps(); ++k) {
    if (!(pi.variance(grid.node(k)) > 0.0))
      throw std::domain_error("ControlLaw: policy variance must be > 0 on the grid");
  }
}

// Control draws and Brownian increments live on disjoint indices of the
// per-path stream so adding or removing one never shifts the other.
inline std::uint64_t noise_index(int step) { return 2ull * static_cast<std::uint64_t>(step); }
inline std::uint64_t control_index(int step) {
  return 2ull * static_cast<std::uint64_t>(step) + 1ull;
}

enum class Record { Full, TerminalOnly };

template <Record R>
void run_simulation(const CoefficientModel& model, const CaseParams& params,
                    const ControlLaw& law, double x0, const TimeGrid& grid, int n_paths,
                    std::uint64_t seed, PathBundle* bundle, std::vector<double>* terminal) {
  if (n_paths < 1) throw std::domain_error("simulate: n_paths must be >= 1");
  if (law.kind() == ControlLaw::Kind::Randomized ||
      law.kind() == ControlLaw::Kind::ExploratoryMean)
    validate_policy_on_grid(law.policy(), grid);

  const int n = grid.n_steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const bool record_controls = R == Record::Full &&
                               (law.kind() == ControlLaw::Kind::FeedbackRho ||
                                law.kind() == ControlLaw::Kind::SubstitutedCurve ||
                                law.kind() == ControlLaw::Kind::Randomized);

  if constexpr (R == Record::Full) {
    bundle->grid = grid;
    bundle->n_paths = n_paths;
    bundle->seed = seed;
    bundle->states.assign(static_cast<std::size_t>(n_paths) * (n + 1), 0.0);
    bundle->noise.assign(static_cast<std::size_t>(n_paths) * n, 0.0);
    if (record_controls) bundle->controls.assign(static_cast<std::size_t>(n_paths) * n, 0.0);
  } else {
    terminal->assign(static_cast<std::size_t>(n_paths), 0.0);
  }

  // Per-step curve values are path-independent; evaluate once.
  std::vector<double> curve_rho;
  if (law.kind() == ControlLaw::Kind::SubstitutedCurve) {
    curve_rho.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) curve_rho[static_cast<std::size_t>(k)] = law.curve()(grid.node(k));
  }
  std::vector<double> pol_mean_slope, pol_sd, pol_var;
  if (law.kind() == ControlLaw::Kind::Randomized ||
      law.kind() == ControlLaw::Kind::ExploratoryMean) {
    pol_mean_slope.resize(static_cast<std::size_t>(n));
    pol_sd.resize(static_cast<std::size_t>(n));
    pol_var.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double t = grid.node(k);
      pol_mean_slope[static_cast<std::size_t>(k)] = law.policy().mean_slope(t);
      pol_var[static_cast<std::size_t>(k)] = law.policy().variance(t);
      pol_sd[static_cast<std::size_t>(k)] = std::sqrt(pol_var[static_cast<std::size_t>(k)]);
    }
  }

  parallel_paths(n_paths, [&](int lo, int hi) {
    for (int p = lo; p < hi; ++p) {
      PathRng rng(seed, static_cast<std::uint64_t>(p));
      double x = x0;
      if constexpr (R == Record::Full)
        bundle->states[static_cast<std::size_t>(p) * (n + 1)] = x;
      for (int k = 0; k < n; ++k) {
        const double t = grid.node(k);
        const double dw = sqrt_dt * rng.normal(noise_index(k));
        double b = 0.0, s = 0.0;
        double rho = 0.0;
        bool have_rho = false;
        switch (law.kind()) {
          case ControlLaw::Kind::FeedbackU: {
            const double u = law.feedback()(t, x);
            b = model.drift(params, t, x, u);
            s = model.diffusion(params, t, x, u);
            break;
          }
          case ControlLaw::Kind::FeedbackRho:
            rho = law.feedback()(t, x);
            have_rho = true;
            b = model.sub_drift(params, t, x, rho);
            s = model.sub_diffusion(params, t, x, rho);
            break;
          case ControlLaw::Kind::SubstitutedCurve:
            rho = curve_rho[static_cast<std::size_t>(k)];
            have_rho = true;
            b = model.sub_drift(params, t, x, rho);
            s = model.sub_diffusion(params, t, x, rho);
            break;
          case ControlLaw::Kind::Randomized:
            rho = pol_mean_slope[static_cast<std::size_t>(k)] * x +
                  pol_sd[static_cast<std::size_t>(k)] * rng.normal(control_index(k));
            have_rho = true;
            b = model.sub_drift(params, t, x, rho);
            s = model.sub_diffusion(params, t, x, rho);
            break;
          case ControlLaw::Kind::ExploratoryMean: {
            const double mu = pol_mean_slope[static_cast<std::size_t>(k)] * x;
            const double w = pol_var[static_cast<std::size_t>(k)];
            const RhoAffine bd = model.sub_drift_affine(params, t, x);
            const RhoAffine sd = model.sub_diffusion_affine(params, t, x);
            b = bd.at(mu);
            const double sm = sd.at(mu);
            s = std::sqrt(sm * sm + sd.c1 * sd.c1 * w);  // positive root
            break;
          }
        }
        x = x + b * dt + s * dw;
        if (!std::isfinite(x)) throw SimulationError(p, k);
        if constexpr (R == Record::Full) {
          bundle->states[static_cast<std::size_t>(p) * (n + 1) + k + 1] = x;
          bundle->noise[static_cast<std::size_t>(p) * n + k] = dw;
          if (record_controls && have_rho)
            bundle->controls[static_cast<std::size_t>(p) * n + k] = rho;
        }
      }
      if constexpr (R == Record::TerminalOnly) (*terminal)[static_cast<std::size_t>(p)] = x;
    }
  });
}

}  // namespace

PathBundle simulate(const CoefficientModel& model, const CaseParams& params,
                    const ControlLaw& law, double x0, const TimeGrid& grid, int n_paths,
                    std::uint64_t seed) {
  PathBundle bundle{grid, 0, 0, {}, {}, {}};
  run_simulation<Record::Full>(model, params, law, x0, grid, n_paths, seed, &bundle, nullptr);
  return bundle;
}

std::vector<double> simulate_terminal(const CoefficientModel& model, const CaseParams& params,
                                      const ControlLaw& law, double x0, const TimeGrid& grid,
                                      int n_paths, std::uint64_t seed) {
  std::vector<double> terminal;
  PathBundle unused{grid, 0, 0, {}, {}, {}};
  run_simulation<Record::TerminalOnly>(model, params, law, x0, grid, n_paths, seed, &unused,
                                       &terminal);
  return terminal;
}

std::vector<double> pathwise_costs(const PathBundle& bundle, const CostSpec& cost,
                                   const GaussianPolicy* policy) {
  const int n = bundle.grid.n_steps();
  const double dt = bundle.grid.dt();
  const bool need_control = cost.running_uses_control;
  const bool closed_running = need_control && !bundle.has_controls();
  if (closed_running && (!policy || !cost.running_quad))
    throw std::logic_error(
        "evaluate_cost: running cost needs controls, but the bundle has none and no policy "
        "was given");

  // Deterministic per-step additions (entropy penalty, closed running moment
  // pieces that do not depend on the path) still vary with x, so everything
  // is accumulated pathwise.
  std::vector<double> entropy_step(static_cast<std::size_t>(n), 0.0);
  if (policy) {
    for (int k = 0; k < n; ++k) {
      const double w = policy->variance(bundle.grid.node(k));
      // int pi ln pi for a Gaussian with variance w.
      entropy_step[static_cast<std::size_t>(k)] =
          cost.lambda * (-0.5 * (std::log(2.0 * 3.14159265358979323846 * w) + 1.0));
    }
  }

  std::vector<double> costs(static_cast<std::size_t>(bundle.n_paths), 0.0);
  parallel_paths(bundle.n_paths, [&](int lo, int hi) {
    for (int p = lo; p < hi; ++p) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const double t = bundle.grid.node(k);
        const double x = bundle.state(p, k);
        double f;
        if (!need_control) {
          f = cost.running(t, x, 0.0);
        } else if (!closed_running) {
          f = cost.running(t, x, bundle.control(p, k));
        } else {
          const QuadRho q = cost.running_quad(t, x);
          const double mu = policy->mean(t, x);
          const double w = policy->variance(t);
          f = q.c0 + q.c1 * mu + q.c2 * (mu * mu + w);
        }
        acc += (f + entropy_step[static_cast<std::size_t>(k)]) * dt;
      }
      acc += cost.terminal(bundle.state(p, n));
      costs[static_cast<std::size_t>(p)] = acc;
    }
  });
  return costs;
}

CostEstimate evaluate_cost(const PathBundle& bundle, const CostSpec& cost,
                           const GaussianPolicy* policy) {
  const std::vector<double> costs = pathwise_costs(bundle, cost, policy);
  const double n = static_cast<double>(costs.size());
  double mean = 0.0;
  for (double c : costs) mean += c;
  mean /= n;
  double ss = 0.0;
  for (double c : costs) ss += (c - mean) * (c - mean);
  const double sd = costs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

double path_equivalence(const CoefficientModel& model, const CaseParams& params, double x0,
                        const TimeGrid& grid, int n_paths, std::uint64_t seed) {
  const auto u_star = [&model, &params](double t, double x) {
    return model.u_from_rho(params, t, x, model.optimal_rho(params, t, x));
  };
  const auto rho_star = [&model, &params](double t, double x) {
    return model.optimal_rho(params, t, x);
  };
  const PathBundle a =
      simulate(model, params, ControlLaw::feedback_u(u_star), x0, grid, n_paths, seed);
  const PathBundle b =
      simulate(model, params, ControlLaw::feedback_rho(rho_star), x0, grid, n_paths, seed);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i)
    max_diff = std::max(max_diff, std::abs(a.states[i] - b.states[i]));
  return max_diff;
}

void write_paths_csv(const PathBundle& bundle, const std::string& path) {
  CsvWriter csv(path);
  const int n = bundle.grid.n_steps();
  if (bundle.has_controls())
    csv.row({"path", "step", "time", "state", "control"});
  else
    csv.row({"path", "step", "time", "state"});
  for (int p = 0; p < bundle.n_paths; ++p) {
    for (int k = 0; k <= n; ++k) {
      std::vector<std::string> fields = {std::to_string(p), std::to_string(k),
                                         fmt17(bundle.grid.node(k)), fmt17(bundle.state(p, k))};
      if (bundle.has_controls()) fields.push_back(k < n ? fmt17(bundle.control(p, k)) : "");
      csv.row(fields);
    }
  }
  csv.close();
}

}  // namespace sdelearn
