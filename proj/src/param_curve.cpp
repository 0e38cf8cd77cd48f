#include "sdelearn/param_curve.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sdelearn {

ParamCurve::ParamCurve(std::vector<double> knots, std::vector<double> values, double t_end)
    : knots_(std::move(knots)), values_(std::move(values)), t_end_(t_end) {
  if (knots_.empty() || knots_.size() != values_.size())
    throw std::invalid_argument("ParamCurve: need one value per knot, at least one knot");
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
    if (!(knots_[i] < knots_[i + 1]))
      throw std::invalid_argument("ParamCurve: knots must be strictly ascending");
  if (!(knots_.back() <= t_end_))
    throw std::invalid_argument("ParamCurve: last knot must not exceed t_end");
  for (double k : knots_)
    if (!std::isfinite(k)) throw std::invalid_argument("ParamCurve: non-finite knot");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("ParamCurve: non-finite value");
}

ParamCurve ParamCurve::constant(double t0, double t_end, double value) {
  return ParamCurve({t0}, {value}, t_end);
}

double ParamCurve::operator()(double t) const {
  if (!(t >= knots_.front() && t <= t_end_))
    throw std::domain_error("ParamCurve: time " + std::to_string(t) + " outside [" +
                            std::to_string(knots_.front()) + ", " + std::to_string(t_end_) + "]");
  // Right-continuous: value of the interval whose left knot is <= t.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double ParamCurve::integral(double a, double b) const {
  if (!(a >= knots_.front() && b <= t_end_ && a <= b))
    throw std::domain_error("ParamCurve::integral: need t0 <= a <= b <= t_end");
  double total = 0.0;
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const double lo = std::max(knots_[i], a);
    const double hi = std::min(i + 1 < knots_.size() ? knots_[i + 1] : t_end_, b);
    if (hi > lo) total += values_[i] * (hi - lo);
  }
  return total;
}

ParamCurve ParamCurve::map(const std::function<double(double)>& fn) const {
  std::vector<double> mapped(values_.size());
  std::transform(values_.begin(), values_.end(), mapped.begin(), fn);
  return ParamCurve(knots_, std::move(mapped), t_end_);
}

ParamCurve ParamCurve::combine(const ParamCurve& a, const ParamCurve& b,
                               const std::function<double(double, double)>& fn) {
  if (a.t0() != b.t0() || a.t_end() != b.t_end())
    throw std::invalid_argument("ParamCurve::combine: curves must share [t0, t_end]");
  std::vector<double> merged(a.knots_);
  merged.insert(merged.end(), b.knots_.begin(), b.knots_.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::vector<double> values;
  values.reserve(merged.size());
  for (double k : merged) values.push_back(fn(a(k), b(k)));
  return ParamCurve(std::move(merged), std::move(values), a.t_end());
}

}  // namespace sdelearn
