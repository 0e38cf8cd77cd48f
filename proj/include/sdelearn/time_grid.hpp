#pragma once

#include <cmath>
#include <stdexcept>

namespace sdelearn {

/// Uniform time grid on [t0, T] with n_steps steps. Nodes are computed as
/// affine combinations of the endpoints so node(n_steps) == T exactly, with
/// no accumulation drift.
class TimeGrid {
 public:
  TimeGrid(double t0, double T, int n_steps) : t0_(t0), T_(T), n_(n_steps) {
    if (!std::isfinite(t0) || !std::isfinite(T) || !(T > t0))
      throw std::domain_error("TimeGrid: requires finite T > t0");
    if (n_steps < 1) throw std::domain_error("TimeGrid: requires n_steps >= 1");
  }

  double t0() const { return t0_; }
  double T() const { return T_; }
  int n_steps() const { return n_; }
  double dt() const { return (T_ - t0_) / n_; }

  double node(int k) const {
    return (double(n_ - k) * t0_ + double(k) * T_) / double(n_);
  }

 private:
  double t0_;
  double T_;
  int n_;
};

}  // namespace sdelearn
