#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdelearn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key = value experiment description. Every numeric field is validated
/// against the module preconditions before any computation starts.
struct ExperimentConfig {
  std::string case_name;  // diffusion | drift | general | custom
  std::string command;    // simulate | policy | verify | learn | two-step | policy-iter
  double t0 = 0.0;
  double T = 1.0;
  int n_steps = 100;
  int n_paths = 10000;
  int episodes = 500;
  double lambda = 0.1;
  double x0 = 1.0;
  std::uint64_t seed = 42;
  std::vector<double> beta_knots;   // defaults to {t0}
  std::vector<double> beta_values;  // required for non-custom cases
  std::vector<double> alpha_knots;  // defaults to {t0}
  std::vector<double> alpha_values;  // required for the general case
  double rho_grid_min = 0.0;
  double rho_grid_max = 0.0;
  bool rho_grid_auto = true;  // set false when min/max given
  int rho_grid_points = 2001;
  int policy_iters = 3;
  std::string out_dir = "out";
};

/// Parses `key = value` lines with # comments. Unknown keys, malformed
/// values, and violated invariants raise ConfigError naming the line and key.
ExperimentConfig parse_config(const std::string& text);

/// Canonical key = value dump of a config (used in the run manifest).
std::string dump_config(const ExperimentConfig& config);

/// Runs the configured experiment, writing artifacts under out_dir.
/// Returns the process exit code: 0 success / all checks passed,
/// 1 verification failure, 2 usage/config/IO error.
int run_experiment(const ExperimentConfig& config);

/// Command-line entry: one positional config path, optional --out-dir
/// override. Same exit-code contract as run_experiment.
int cli_main(int argc, char** argv);

}  // namespace sdelearn
