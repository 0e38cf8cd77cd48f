#include "sdelearn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "sdelearn/csv.hpp"

namespace sdelearn {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& key, const std::string& message) {
  std::ostringstream out;
  out << "config error at line " << line;
  if (!key.empty()) out << " (key '" << key << "')";
  out << ": " << message;
  throw ConfigError(out.str());
}

double parse_double(int line, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(x)) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    fail(line, key, "expected a finite number, got '" + value + "'");
  }
}

long long parse_integer(int line, const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    fail(line, key, "expected an integer, got '" + value + "'");
  }
}

std::vector<double> parse_list(int line, const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(line, key, trim(item)));
  if (out.empty()) fail(line, key, "expected a comma-separated list of numbers");
  return out;
}

void check_curve_lists(const std::map<std::string, int>& key_line, const std::string& name,
                       const std::vector<double>& knots, const std::vector<double>& values,
                       double t0, double T) {
  const auto line_of = [&key_line](const std::string& k) {
    const auto it = key_line.find(k);
    return it == key_line.end() ? 0 : it->second;
  };
  const std::string knots_key = name + "_knots";
  if (knots.size() != values.size())
    fail(line_of(knots_key), knots_key,
         name + "_knots and " + name + "_values must have the same length");
  if (knots.front() != t0) fail(line_of(knots_key), knots_key, "first knot must equal t0");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (!(knots[i] < knots[i + 1]))
      fail(line_of(knots_key), knots_key, "knots must be strictly ascending");
  if (!(knots.back() <= T)) fail(line_of(knots_key), knots_key, "last knot must not exceed T");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::map<std::string, int> key_line;
  bool rho_min_set = false, rho_max_set = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    const std::string stripped = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail(line, "", "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(line, "", "empty key");
    if (value.empty()) fail(line, key, "empty value");
    if (key_line.count(key)) fail(line, key, "duplicate key (first set at line " +
                                                 std::to_string(key_line[key]) + ")");
    key_line[key] = line;

    if (key == "case") {
      config.case_name = value;
    } else if (key == "command") {
      config.command = value;
    } else if (key == "t0") {
      config.t0 = parse_double(line, key, value);
    } else if (key == "T") {
      config.T = parse_double(line, key, value);
    } else if (key == "n_steps") {
      config.n_steps = static_cast<int>(parse_integer(line, key, value));
    } else if (key == "n_paths") {
      config.n_paths = static_cast<int>(parse_integer(line, key, value));
    } else if (key == "episodes") {
      config.episodes = static_cast<int>(parse_integer(line, key, value));
    } else if (key == "lambda") {
      config.lambda = parse_double(line, key, value);
    } else if (key == "x0") {
      config.x0 = parse_double(line, key, value);
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(parse_integer(line, key, value));
    } else if (key == "beta_knots") {
      config.beta_knots = parse_list(line, key, value);
    } else if (key == "beta_values") {
      config.beta_values = parse_list(line, key, value);
    } else if (key == "alpha_knots") {
      config.alpha_knots = parse_list(line, key, value);
    } else if (key == "alpha_values") {
      config.alpha_values = parse_list(line, key, value);
    } else if (key == "rho_grid_min") {
      config.rho_grid_min = parse_double(line, key, value);
      rho_min_set = true;
    } else if (key == "rho_grid_max") {
      config.rho_grid_max = parse_double(line, key, value);
      rho_max_set = true;
    } else if (key == "rho_grid_points") {
      config.rho_grid_points = static_cast<int>(parse_integer(line, key, value));
    } else if (key == "policy_iters") {
      config.policy_iters = static_cast<int>(parse_integer(line, key, value));
    } else if (key == "out_dir") {
      config.out_dir = value;
    } else {
      fail(line, key, "unknown key");
    }
  }

  // Fail-fast validation before any computation.
  const auto line_of = [&key_line](const std::string& k) {
    const auto it = key_line.find(k);
    return it == key_line.end() ? 0 : it->second;
  };
  if (config.case_name.empty()) fail(0, "case", "required key missing");
  if (config.case_name != "diffusion" && config.case_name != "drift" &&
      config.case_name != "general" && config.case_name != "custom")
    fail(line_of("case"), "case", "must be one of diffusion|drift|general|custom");
  if (config.command.empty()) fail(0, "command", "required key missing");
  if (config.command != "simulate" && config.command != "policy" && config.command != "verify" &&
      config.command != "learn" && config.command != "two-step" &&
      config.command != "policy-iter")
    fail(line_of("command"), "command",
         "must be one of simulate|policy|verify|learn|two-step|policy-iter");
  if (!(config.T > config.t0)) fail(line_of("T"), "T", "requires T > t0");
  if (config.n_steps < 1) fail(line_of("n_steps"), "n_steps", "must be >= 1");
  if (config.n_paths < 1) fail(line_of("n_paths"), "n_paths", "must be >= 1");
  if (config.episodes < 1) fail(line_of("episodes"), "episodes", "must be >= 1");
  if (!(config.lambda > 0.0)) fail(line_of("lambda"), "lambda", "must be > 0");
  if (config.rho_grid_points < 3) fail(line_of("rho_grid_points"), "rho_grid_points", "must be >= 3");
  if (config.policy_iters < 0) fail(line_of("policy_iters"), "policy_iters", "must be >= 0");
  if (rho_min_set != rho_max_set)
    fail(line_of(rho_min_set ? "rho_grid_min" : "rho_grid_max"), "rho_grid_min",
         "rho_grid_min and rho_grid_max must be given together");
  config.rho_grid_auto = !rho_min_set;
  if (!config.rho_grid_auto && !(config.rho_grid_min < config.rho_grid_max))
    fail(line_of("rho_grid_max"), "rho_grid_max", "requires rho_grid_min < rho_grid_max");

  if (config.case_name != "custom") {
    if (config.beta_values.empty()) fail(0, "beta_values", "required for this case");
    if (config.beta_knots.empty()) config.beta_knots = {config.t0};
    check_curve_lists(key_line, "beta", config.beta_knots, config.beta_values, config.t0,
                      config.T);
  }
  if (config.case_name == "general") {
    if (config.alpha_values.empty()) fail(0, "alpha_values", "required for the general case");
    if (config.alpha_knots.empty()) config.alpha_knots = {config.t0};
    check_curve_lists(key_line, "alpha", config.alpha_knots, config.alpha_values, config.t0,
                      config.T);
  }
  return config;
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += fmt17(v[i]);
    }
    return s;
  };
  out << "case = " << c.case_name << "\n";
  out << "command = " << c.command << "\n";
  out << "t0 = " << fmt17(c.t0) << "\n";
  out << "T = " << fmt17(c.T) << "\n";
  out << "n_steps = " << c.n_steps << "\n";
  out << "n_paths = " << c.n_paths << "\n";
  out << "episodes = " << c.episodes << "\n";
  out << "lambda = " << fmt17(c.lambda) << "\n";
  out << "x0 = " << fmt17(c.x0) << "\n";
  out << "seed = " << c.seed << "\n";
  if (!c.beta_values.empty()) {
    out << "beta_knots = " << list(c.beta_knots) << "\n";
    out << "beta_values = " << list(c.beta_values) << "\n";
  }
  if (!c.alpha_values.empty()) {
    out << "alpha_knots = " << list(c.alpha_knots) << "\n";
    out << "alpha_values = " << list(c.alpha_values) << "\n";
  }
  if (!c.rho_grid_auto) {
    out << "rho_grid_min = " << fmt17(c.rho_grid_min) << "\n";
    out << "rho_grid_max = " << fmt17(c.rho_grid_max) << "\n";
  }
  out << "rho_grid_points = " << c.rho_grid_points << "\n";
  out << "policy_iters = " << c.policy_iters << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  return out.str();
}

}  // namespace sdelearn
