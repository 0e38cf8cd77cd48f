#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sdelearn/closed_form.hpp"
#include "sdelearn/config.hpp"
#include "sdelearn/csv.hpp"
#include "sdelearn/gibbs.hpp"
#include "sdelearn/learner.hpp"
#include "sdelearn/sim.hpp"
#include "sdelearn/verification.hpp"

namespace sdelearn {

namespace {

constexpr const char* kVersion = "sdelearn 0.1.0";

struct Experiment {
  TimeGrid grid;
  CaseParams params;
  std::vector<CoefficientModel> stages;
};

Experiment build_experiment(const ExperimentConfig& c) {
  TimeGrid grid(c.t0, c.T, c.n_steps);
  if (c.case_name == "custom")
    throw ConfigError(
        "case 'custom' is only reachable through the library API; the CLI cannot describe "
        "custom coefficients");
  ParamCurve beta(c.beta_knots, c.beta_values, c.T);
  std::optional<ParamCurve> alpha;
  std::vector<CoefficientModel> stages;
  if (c.case_name == "diffusion") {
    stages.push_back(CoefficientModel::diffusion_param());
  } else if (c.case_name == "drift") {
    stages.push_back(CoefficientModel::drift_param());
  } else {
    alpha = ParamCurve(c.alpha_knots, c.alpha_values, c.T);
    stages.push_back(CoefficientModel::general_step1());
    stages.push_back(CoefficientModel::general_step2());
  }
  return {grid, CaseParams{std::move(beta), std::move(alpha)}, std::move(stages)};
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_manifest(const ExperimentConfig& c) {
  std::ofstream out(join_path(c.out_dir, "run_manifest.txt"), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write run manifest in " + c.out_dir);
  out << kVersion << "\n" << dump_config(c);
  if (!out) throw std::runtime_error("failed writing run manifest");
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = (double(n - 1 - i) * lo + double(i) * hi) / double(n - 1);
  return v;
}

int command_verify(const ExperimentConfig& c, const Experiment& ex) {
  std::vector<VerificationReport> reports;
  const double span = c.T - c.t0;
  const std::vector<double> t_grid = linspace(c.t0 + 0.01 * span, c.T - 0.01 * span, 50);
  const std::vector<double> x_grid = linspace(-2.0, 2.0, 50);
  const int mc_paths = std::max(c.n_paths, 10000);

  for (const CoefficientModel& model : ex.stages) {
    const std::string stage_tag =
        ex.stages.size() > 1 ? "/step" + std::to_string(model.stage()) : "";
    const CaseSolution sol = solve_case(model, ex.params, c.lambda, ex.grid);

    VerificationReport hjb = hjb_residual(model, ex.params, sol.value, sol.policy, c.lambda,
                                          t_grid, x_grid);
    hjb.check += stage_tag;
    reports.push_back(hjb);

    VerificationReport mm =
        moment_match(model, ex.params, sol.policy, c.x0, ex.grid, mc_paths, c.seed);
    mm.check += stage_tag;
    reports.push_back(mm);

    VerificationReport dl = dirac_limit(model, ex.params, {1e-1, 1e-2, 1e-3, 1e-4}, c.x0,
                                        c.t0 + 0.37 * span, ex.grid);
    dl.check += stage_tag;
    reports.push_back(dl);

    VerificationReport op =
        optimality_perturbation(model, ex.params, c.lambda, c.x0, ex.grid, mc_paths, c.seed,
                                {-0.1, -0.05, 0.05, 0.1}, {0.5, 2.0});
    op.check += stage_tag;
    reports.push_back(op);

    VerificationReport pe;
    pe.check = "path_equivalence" + stage_tag;
    pe.grid = "100 paths, shared noise";
    pe.add_abs("max_abs_state_diff",
               path_equivalence(model, ex.params, c.x0, ex.grid, 100, c.seed), 0.0);
    reports.push_back(pe);
  }

  write_verification_csv(reports, join_path(c.out_dir, "verification.csv"));
  std::cout << summary_text(reports);
  for (const auto& report : reports)
    if (!report.pass) return 1;
  return 0;
}

void command_policy(const ExperimentConfig& c, const Experiment& ex) {
  const CaseSolution sol = solve_case(ex.stages.front(), ex.params, c.lambda, ex.grid);
  write_policy_curves_csv(sol, ex.grid, join_path(c.out_dir, "policy_curves.csv"));
  if (ex.stages.size() > 1) {
    const CaseSolution sol2 = solve_case(ex.stages.back(), ex.params, c.lambda, ex.grid);
    write_policy_curves_csv(sol2, ex.grid, join_path(c.out_dir, "policy_curves_step2.csv"));
  }
  const CostSpec cost = CostSpec::for_case(ex.stages.front(), ex.params, c.lambda);
  const auto L = [&](double rho) {
    return hamiltonian(ex.stages.front(), sol.value, cost, ex.params, c.t0, c.x0, rho);
  };
  const GibbsDensity density =
      c.rho_grid_auto
          ? gibbs_density_auto(L, c.lambda, c.rho_grid_points)
          : gibbs_density(L, c.lambda, c.rho_grid_min, c.rho_grid_max, c.rho_grid_points);
  write_density_csv(density, join_path(c.out_dir, "gibbs_density.csv"));
}

void command_simulate(const ExperimentConfig& c, const Experiment& ex) {
  const CoefficientModel& model = ex.stages.front();
  const CaseSolution sol = solve_case(model, ex.params, c.lambda, ex.grid);
  const PathBundle bundle = simulate(model, ex.params, ControlLaw::randomized(sol.policy), c.x0,
                                     ex.grid, c.n_paths, c.seed);
  write_paths_csv(bundle, join_path(c.out_dir, "paths.csv"));
}

void command_learn(const ExperimentConfig& c, const Experiment& ex) {
  const CoefficientModel& model = ex.stages.front();
  const EstimateResult est =
      estimate_parameter(model, ex.params, c.lambda, ex.grid, c.episodes, c.x0, c.seed);
  write_estimates_csv(est, model.tracked_param(ex.params),
                      join_path(c.out_dir, "estimates.csv"));
}

void command_two_step(const ExperimentConfig& c, const Experiment& ex) {
  if (ex.stages.size() != 2)
    throw ConfigError("command 'two-step' requires case = general");
  const TwoStepEstimate est = two_step_estimate(ex.params.alpha_curve(), ex.params.beta,
                                                c.lambda, ex.grid, c.episodes, c.x0, c.seed);
  write_estimates_csv(est.beta_hat, ex.params.beta, join_path(c.out_dir, "estimates_beta.csv"));
  write_estimates_csv(est.alpha_hat, ex.params.alpha_curve(),
                      join_path(c.out_dir, "estimates_alpha.csv"));
}

void command_policy_iter(const ExperimentConfig& c, const Experiment& ex) {
  const CoefficientModel& model = ex.stages.front();
  const CaseSolution init = solve_case(model, ex.params, c.lambda, ex.grid);
  const PolicyIterationResult result = policy_iteration(
      model, ex.params, c.lambda, ex.grid, c.episodes, c.policy_iters, c.seed, init);
  CsvWriter csv(join_path(c.out_dir, "policy_iter_trace.csv"));
  csv.row({"iteration", "knot_time", "a1", "a1_std_error", "mean_slope"});
  const auto& knots = result.policy.mean_slope.knots();
  for (std::size_t it = 0; it < result.trace.size(); ++it)
    for (std::size_t j = 0; j < knots.size(); ++j)
      csv.row({std::to_string(it + 1), fmt17(knots[j]), fmt17(result.trace[it].a1[j]),
               fmt17(result.trace[it].a1_std_error[j]), fmt17(result.trace[it].slope[j])});
  csv.close();
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  try {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create out_dir '" + config.out_dir +
                                     "': " + ec.message());
    const Experiment ex = build_experiment(config);
    write_manifest(config);
    if (config.command == "verify") return command_verify(config, ex);
    if (config.command == "policy")
      command_policy(config, ex);
    else if (config.command == "simulate")
      command_simulate(config, ex);
    else if (config.command == "learn")
      command_learn(config, ex);
    else if (config.command == "two-step")
      command_two_step(config, ex);
    else if (config.command == "policy-iter")
      command_policy_iter(config, ex);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"parameter learning for scalar SDEs via exploratory optimal control"};
  std::string config_path;
  std::string out_dir_override;
  app.add_option("config", config_path, "path to a key = value config file")->required();
  app.add_option("--out-dir", out_dir_override, "override out_dir from the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return 2;
  }
  std::ostringstream text;
  text << in.rdbuf();

  ExperimentConfig config;
  try {
    config = parse_config(text.str());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (!out_dir_override.empty()) config.out_dir = out_dir_override;
  return run_experiment(config);
}

}  // namespace sdelearn
