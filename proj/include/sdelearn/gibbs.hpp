#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdelearn/model.hpp"
#include "sdelearn/policy.hpp"

namespace sdelearn {

struct GridRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discretized control density p(rho) proportional to exp(-L(rho)/lambda) on
/// a uniform grid, normalized so the trapezoid sum equals one.
struct GibbsDensity {
  std::vector<double> rho;          // uniform grid nodes
  std::vector<double> density;      // normalized pdf values at the nodes
  std::vector<double> log_density;  // ln of the normalized pdf
  double cell = 0.0;                // node spacing

  /// Trapezoid mass of the stored density; one up to rounding.
  double trapezoid_mass() const;
  /// Largest boundary density relative to the peak; small means the grid is
  /// wide enough to hold essentially all mass.
  double boundary_ratio() const;
  /// Mean and variance under the trapezoid rule.
  double moment_mean() const;
  double moment_variance() const;
};

/// Gibbs density of a Hamiltonian-like integrand: p proportional to
/// exp(-L/lambda), normalized with a max-shift before exponentiation.
/// Throws GridRangeError when the grid resolves fewer than three nodes of
/// non-negligible mass (range far from the minimum of L).
GibbsDensity gibbs_density(const std::function<double(double)>& L, double lambda, double rho_min,
                           double rho_max, int m);

/// Same, with the grid chosen automatically: centered at the minimizer of L
/// found by golden-section search, half-width 8 standard deviations of the
/// local Gaussian approximation (from the second difference of L).
GibbsDensity gibbs_density_auto(const std::function<double(double)>& L, double lambda, int m = 2001);

struct GaussianReduction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact reduction for a quadratic integrand A rho^2 + B rho + C:
/// the Gibbs density is N(-B/(2A), lambda/(2A)). Throws std::domain_error
/// when A <= 0 (non-integrable Gibbs density).
GaussianReduction gaussian_reduce(double A, double B, double lambda);

/// Grid argmax refined by a parabola through the three log-density points
/// around the peak (exact for Gaussian densities); ties break toward the
/// smallest rho. Throws GridRangeError when the peak sits on the boundary.
double density_argmax(const GibbsDensity& d);

/// Inverse-CDF sampling on the trapezoidal CDF, linear interpolation inside
/// cells; deterministic given the seed.
std::vector<double> density_sample(const GibbsDensity& d, int n, std::uint64_t seed);

/// int pi ln pi for the Gaussian policy at time t: -0.5 ln(2 pi e var(t)).
double entropy_term(const GaussianPolicy& policy, double t);

/// Hamiltonian-like integrand of the exploratory HJB:
/// L = f(t,x,rho) + 0.5 sigma_hat^2 vxx + b_hat vx.
double hamiltonian(const CoefficientModel& model, const QuadraticValue& value,
                   const CostSpec& cost, const CaseParams& params, double t, double x, double rho);

struct HamiltonianQuad {
  double a = 0.0;  // rho^2 coefficient
  double b = 0.0;  // rho coefficient
  double c = 0.0;  // constant
};

/// Exact quadratic-in-rho coefficients of the Hamiltonian (named cases, and
/// any case with affine substituted coefficients and quadratic running cost).
HamiltonianQuad hamiltonian_quad(const CoefficientModel& model, const QuadraticValue& value,
                                 const CostSpec& cost, const CaseParams& params, double t,
                                 double x);

/// First-order condition residual at rho:
/// d_rho f + sigma_hat d_rho sigma_hat vxx + d_rho b_hat vx,
/// with d_rho by central difference, step 1e-6 * max(1, |rho|).
double first_order_residual(const CoefficientModel& model, const QuadraticValue& value,
                            const CostSpec& cost, const CaseParams& params, double t, double x,
                            double rho);

/// CSV export: header rho,density, one row per grid node.
void write_density_csv(const GibbsDensity& d, const std::string& path);

}  // namespace sdelearn
