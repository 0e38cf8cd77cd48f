#include "sdelearn/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdelearn/csv.hpp"
#include "sdelearn/rng.hpp"

namespace sdelearn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Affine node formula: mirrored ranges produce bitwise-mirrored nodes, which
// keeps symmetric integrands exactly symmetric on the grid.
inline double grid_node(double lo, double hi, int m, int j) {
  return (double(m - 1 - j) * lo + double(j) * hi) / double(m - 1);
}

double trapezoid(const std::vector<double>& y, double h) {
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t j = 1; j + 1 < y.size(); ++j) s += y[j];
  return s * h;
}

}  // namespace

double GibbsDensity::trapezoid_mass() const { return trapezoid(density, cell); }

double GibbsDensity::boundary_ratio() const {
  const double peak = *std::max_element(density.begin(), density.end());
  return std::max(density.front(), density.back()) / peak;
}

double GibbsDensity::moment_mean() const {
  std::vector<double> y(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) y[j] = rho[j] * density[j];
  return trapezoid(y, cell);
}

double GibbsDensity::moment_variance() const {
  const double m1 = moment_mean();
  std::vector<double> y(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) y[j] = (rho[j] - m1) * (rho[j] - m1) * density[j];
  return trapezoid(y, cell);
}

GibbsDensity gibbs_density(const std::function<double(double)>& L, double lambda, double rho_min,
                           double rho_max, int m) {
  if (!(lambda > 0.0)) throw std::domain_error("gibbs_density: lambda must be > 0");
  if (m < 3) throw std::domain_error("gibbs_density: need at least 3 grid points");
  if (!(rho_min < rho_max)) throw std::domain_error("gibbs_density: need rho_min < rho_max");

  GibbsDensity d;
  d.rho.resize(static_cast<std::size_t>(m));
  std::vector<double> logw(static_cast<std::size_t>(m));
  double max_logw = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) {
    d.rho[static_cast<std::size_t>(j)] = grid_node(rho_min, rho_max, m, j);
    const double value = L(d.rho[static_cast<std::size_t>(j)]);
    if (!std::isfinite(value)) throw std::domain_error("gibbs_density: non-finite integrand");
    logw[static_cast<std::size_t>(j)] = -value / lambda;
    max_logw = std::max(max_logw, logw[static_cast<std::size_t>(j)]);
  }

  d.cell = (rho_max - rho_min) / double(m - 1);
  std::vector<double> shifted(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    shifted[static_cast<std::size_t>(j)] = std::exp(logw[static_cast<std::size_t>(j)] - max_logw);
  const double z = trapezoid(shifted, d.cell);

  d.density.resize(static_cast<std::size_t>(m));
  d.log_density.resize(static_cast<std::size_t>(m));
  const double log_z = std::log(z);
  int resolved = 0;
  for (int j = 0; j < m; ++j) {
    d.density[static_cast<std::size_t>(j)] = shifted[static_cast<std::size_t>(j)] / z;
    d.log_density[static_cast<std::size_t>(j)] =
        logw[static_cast<std::size_t>(j)] - max_logw - log_z;
    if (shifted[static_cast<std::size_t>(j)] > 1e-300) ++resolved;
  }
  if (resolved < 3)
    throw GridRangeError(
        "gibbs_density: density unresolved on this grid; widen the range or center it on the "
        "minimizer of L");
  return d;
}

GibbsDensity gibbs_density_auto(const std::function<double(double)>& L, double lambda, int m) {
  // Coarse bracket of the minimizer, then golden-section refinement.
  constexpr int kScan = 4097;
  constexpr double kScanHalfWidth = 64.0;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kScan; ++j) {
    const double r = grid_node(-kScanHalfWidth, kScanHalfWidth, kScan, j);
    const double v = L(r);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }
  double lo = grid_node(-kScanHalfWidth, kScanHalfWidth, kScan, std::max(0, best - 1));
  double hi = grid_node(-kScanHalfWidth, kScanHalfWidth, kScan, std::min(kScan - 1, best + 1));
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = L(x1), f2 = L(x2);
  for (int it = 0; it < 120 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi));
       ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = L(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = L(x2);
    }
  }
  const double center = 0.5 * (lo + hi);

  // Local curvature from the second difference; the near-Gaussian density has
  // standard deviation sqrt(lambda / (2 A_loc)).
  const double h = 1e-4 * std::max(1.0, std::abs(center));
  const double second = (L(center + h) - 2.0 * L(center) + L(center - h)) / (h * h);
  const double a_loc = 0.5 * second;
  if (!(a_loc > 0.0))
    throw std::domain_error(
        "gibbs_density_auto: non-positive curvature at the minimizer; Gibbs density is not "
        "integrable on any centered grid");
  const double half_width = 8.0 * std::sqrt(lambda / (2.0 * a_loc));
  return gibbs_density(L, lambda, center - half_width, center + half_width, m);
}

GaussianReduction gaussian_reduce(double A, double B, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("gaussian_reduce: lambda must be > 0");
  if (!(A > 0.0))
    throw std::domain_error(
        "gaussian_reduce: quadratic coefficient must be > 0 for an integrable Gibbs density");
  return {-B / (2.0 * A), lambda / (2.0 * A)};
}

double density_argmax(const GibbsDensity& d) {
  const int m = static_cast<int>(d.rho.size());
  int peak = 0;
  for (int j = 1; j < m; ++j)
    if (d.density[static_cast<std::size_t>(j)] > d.density[static_cast<std::size_t>(peak)])
      peak = j;
  if (peak == 0 || peak == m - 1)
    throw GridRangeError("density_argmax: maximum on the grid boundary; grid too narrow");
  // Parabola through the log density around the peak. Exact for Gaussian
  // densities since their log is quadratic.
  const double ym = d.log_density[static_cast<std::size_t>(peak - 1)];
  const double y0 = d.log_density[static_cast<std::size_t>(peak)];
  const double yp = d.log_density[static_cast<std::size_t>(peak + 1)];
  const double denom = ym - 2.0 * y0 + yp;
  const double offset = denom < 0.0 ? 0.5 * (ym - yp) / denom : 0.0;
  return d.rho[static_cast<std::size_t>(peak)] + offset * d.cell;
}

std::vector<double> density_sample(const GibbsDensity& d, int n, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("density_sample: n must be >= 1");
  const std::size_t m = d.rho.size();
  std::vector<double> cdf(m, 0.0);
  for (std::size_t j = 1; j < m; ++j)
    cdf[j] = cdf[j - 1] + 0.5 * (d.density[j - 1] + d.density[j]) * d.cell;
  const double total = cdf.back();

  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = PathRng(seed, static_cast<std::uint64_t>(i)).uniform(0) * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t j = std::min(m - 1, static_cast<std::size_t>(it - cdf.begin()));
    if (j == 0) j = 1;
    const double span = cdf[j] - cdf[j - 1];
    const double frac = span > 0.0 ? (u - cdf[j - 1]) / span : 0.5;
    out[static_cast<std::size_t>(i)] = d.rho[j - 1] + frac * d.cell;
  }
  return out;
}

double entropy_term(const GaussianPolicy& policy, double t) {
  const double w = policy.variance(t);
  if (!(w > 0.0)) throw std::domain_error("entropy_term: variance must be > 0");
  return -0.5 * (std::log(2.0 * kPi * w) + 1.0);
}

double hamiltonian(const CoefficientModel& model, const QuadraticValue& value,
                   const CostSpec& cost, const CaseParams& params, double t, double x,
                   double rho) {
  const double s = model.sub_diffusion(params, t, x, rho);
  return cost.running(t, x, rho) + 0.5 * s * s * value.vxx(t) +
         model.sub_drift(params, t, x, rho) * value.vx(t, x);
}

HamiltonianQuad hamiltonian_quad(const CoefficientModel& model, const QuadraticValue& value,
                                 const CostSpec& cost, const CaseParams& params, double t,
                                 double x) {
  if (!model.has_affine() || !cost.running_quad)
    throw std::logic_error("hamiltonian_quad: requires affine coefficients and quadratic cost");
  const RhoAffine b = model.sub_drift_affine(params, t, x);
  const RhoAffine s = model.sub_diffusion_affine(params, t, x);
  const QuadRho f = cost.running_quad(t, x);
  const double vx = value.vx(t, x);
  const double vxx = value.vxx(t);
  HamiltonianQuad q;
  q.a = f.c2 + 0.5 * s.c1 * s.c1 * vxx;
  q.b = f.c1 + s.c0 * s.c1 * vxx + b.c1 * vx;
  q.c = f.c0 + 0.5 * s.c0 * s.c0 * vxx + b.c0 * vx;
  return q;
}

double first_order_residual(const CoefficientModel& model, const QuadraticValue& value,
                            const CostSpec& cost, const CaseParams& params, double t, double x,
                            double rho) {
  const double h = 1e-6 * std::max(1.0, std::abs(rho));
  const auto ddrho = [&](const std::function<double(double)>& g) {
    return (g(rho + h) - g(rho - h)) / (2.0 * h);
  };
  const double df = ddrho([&](double r) { return cost.running(t, x, r); });
  const double ds = ddrho([&](double r) { return model.sub_diffusion(params, t, x, r); });
  const double db = ddrho([&](double r) { return model.sub_drift(params, t, x, r); });
  return df + model.sub_diffusion(params, t, x, rho) * ds * value.vxx(t) + db * value.vx(t, x);
}

void write_density_csv(const GibbsDensity& d, const std::string& path) {
  CsvWriter csv(path);
  csv.row({"rho", "density"});
  for (std::size_t j = 0; j < d.rho.size(); ++j) csv.row({fmt17(d.rho[j]), fmt17(d.density[j])});
  csv.close();
}

}  // namespace sdelearn
