#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wavepole/errors.hpp"

namespace wavepole {

/// Uniform radial mesh starting at r = 0.
///
/// All wave functions in the library are sampled on such a mesh; two samples
/// are only comparable when their grids share the step and origin.
class RadialGrid {
public:
  RadialGrid(double step, double r_max) : step_(step) {
    if (!(step > 0.0)) throw domain_error("RadialGrid: step must be positive");
    if (!(r_max > step)) throw domain_error("RadialGrid: r_max must exceed the step");
    n_ = static_cast<std::size_t>(std::llround(r_max / step)) + 1;
  }

  double step() const { return step_; }
  std::size_t size() const { return n_; }
  double r(std::size_t i) const { return static_cast<double>(i) * step_; }
  double r_max() const { return r(n_ - 1); }

  // Nearest grid index for a radius. Callers needing sub-step accuracy
  // interpolate between samples instead.
  std::size_t index_near(double r_value) const {
    if (r_value < 0.0) throw domain_error("RadialGrid: negative radius");
    auto i = static_cast<std::size_t>(std::llround(r_value / step_));
    return i < n_ ? i : n_ - 1;
  }

  bool same_mesh(const RadialGrid& other) const {
    return step_ == other.step_ && n_ == other.n_;
  }

private:
  double step_;
  std::size_t n_;
};

namespace detail {

// Composite Simpson rule over uniformly spaced samples; falls back to a
// trapezoid correction on the last interval when the count is even.
inline double simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  std::size_t m = n;
  if (m % 2 == 0) {
    // leave the final interval to a trapezoid
    sum += 0.5 * h * (y[m - 2] + y[m - 1]);
    m -= 1;
  }
  double s = y[0] + y[m - 1];
  for (std::size_t i = 1; i + 1 < m; i += 2) s += 4.0 * y[i];
  for (std::size_t i = 2; i + 1 < m; i += 2) s += 2.0 * y[i];
  return sum + h / 3.0 * s;
}

} // namespace detail

} // namespace wavepole
