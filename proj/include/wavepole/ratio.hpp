#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "wavepole/analytic.hpp"
#include "wavepole/errors.hpp"
#include "wavepole/parallel.hpp"
#include "wavepole/solver.hpp"

// Ratio of scaled scattering to bound wave functions and its expansion in
// x = alpha^2 + k^2. The scale factor [2 alpha (alpha^2+k^2)]^{1/2} makes the
// ratio approach 1 as the scattering energy is continued to the bound level;
// the coefficients R_n(r) of the power series measure the deviation at real
// energies.

namespace wavepole {

namespace detail {

inline double sqrt_scale(double alpha, double k) {
  return std::sqrt(2.0 * std::abs(alpha) * (alpha * alpha + k * k));
}

// Weighted least squares for y ~ X c with tiny column counts.
template <std::size_t P>
struct WlsResult {
  std::array<double, P> coeff{};
  std::array<double, P> stderr_{};
  double weighted_rms = 0.0;
  double cond = 0.0; // 2-norm condition of the weighted design
};

template <std::size_t P>
WlsResult<P> weighted_ls(const std::vector<std::array<double, P>>& X,
                         const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = y.size();
  std::array<std::array<double, P>, P> N{};
  std::array<double, P> b{};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t q = 0; q < P; ++q) N[p][q] += w[i] * X[i][p] * X[i][q];
      b[p] += w[i] * X[i][p] * y[i];
    }
  // condition estimate from the normal-matrix eigenvalues (power iteration)
  auto mat_vec = [&](const std::array<double, P>& v) {
    std::array<double, P> r{};
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < P; ++q) r[p] += N[p][q] * v[q];
    return r;
  };
  auto norm = [](const std::array<double, P>& v) {
    double s = 0;
    for (double vi : v) s += vi * vi;
    return std::sqrt(s);
  };
  std::array<double, P> v{};
  v[0] = 1.0;
  double lam_max = 0.0;
  for (int it = 0; it < 60; ++it) {
    auto nv = mat_vec(v);
    lam_max = norm(nv);
    if (lam_max == 0.0) break;
    for (std::size_t p = 0; p < P; ++p) v[p] = nv[p] / lam_max;
  }

  // solve N c = b by Gaussian elimination with partial pivoting, tracking the
  // inverse for the standard errors
  std::array<std::array<double, 2 * P>, P> aug{};
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t q = 0; q < P; ++q) aug[p][q] = N[p][q];
    aug[p][P + p] = 1.0;
  }
  for (std::size_t col = 0; col < P; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < P; ++row)
      if (std::abs(aug[row][col]) > std::abs(aug[piv][col])) piv = row;
    std::swap(aug[piv], aug[col]);
    if (aug[col][col] == 0.0) throw fit_error("singular design matrix");
    const double d = aug[col][col];
    for (std::size_t q = 0; q < 2 * P; ++q) aug[col][q] /= d;
    for (std::size_t row = 0; row < P; ++row) {
      if (row == col) continue;
      const double f = aug[row][col];
      for (std::size_t q = 0; q < 2 * P; ++q) aug[row][q] -= f * aug[col][q];
    }
  }
  WlsResult<P> res;
  for (std::size_t p = 0; p < P; ++p) {
    double c = 0;
    for (std::size_t q = 0; q < P; ++q) c += aug[p][P + q] * b[q];
    res.coeff[p] = c;
  }
  double chi2 = 0, wsum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0;
    for (std::size_t p = 0; p < P; ++p) fit += X[i][p] * res.coeff[p];
    chi2 += w[i] * (y[i] - fit) * (y[i] - fit);
    wsum += w[i];
  }
  res.weighted_rms = std::sqrt(chi2 / wsum);
  const double s2 = n > P ? chi2 / static_cast<double>(n - P) : 0.0;
  for (std::size_t p = 0; p < P; ++p) res.stderr_[p] = std::sqrt(s2 * aug[p][P + p]);

  // smallest eigenvalue via power iteration on the (now available) inverse
  std::array<double, P> u{};
  u[0] = 1.0;
  double lam_inv = 0.0;
  for (int it = 0; it < 60; ++it) {
    std::array<double, P> nu{};
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < P; ++q) nu[p] += aug[p][P + q] * u[q];
    lam_inv = norm(nu);
    if (lam_inv == 0.0) break;
    for (std::size_t p = 0; p < P; ++p) u[p] = nu[p] / lam_inv;
  }
  res.cond = lam_inv > 0.0 && lam_max > 0.0 ? std::sqrt(lam_max * lam_inv)
                                            : std::numeric_limits<double>::infinity();
  return res;
}

// Polynomial extrapolation to x = 0: least-squares fit of y against
// {1, t, ..., t^d} with t = x/x_max, returning the intercept.
inline double extrapolate_to_zero(const std::vector<double>& x,
                                  const std::vector<double>& y, int degree) {
  const std::size_t n = x.size();
  const int d = std::min<int>(degree, static_cast<int>(n) - 1);
  const double xmax = *std::max_element(x.begin(), x.end());
  std::vector<std::vector<double>> X(n, std::vector<double>(d + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (int p = 1; p <= d; ++p) X[i][p] = X[i][p - 1] * (x[i] / xmax);
  // normal equations, small and well scaled
  std::vector<std::vector<double>> N(d + 1, std::vector<double>(d + 2, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (int p = 0; p <= d; ++p) {
      for (int q = 0; q <= d; ++q) N[p][q] += X[i][p] * X[i][q];
      N[p][d + 1] += X[i][p] * y[i];
    }
  for (int col = 0; col <= d; ++col) {
    int piv = col;
    for (int row = col + 1; row <= d; ++row)
      if (std::abs(N[row][col]) > std::abs(N[piv][col])) piv = row;
    std::swap(N[piv], N[col]);
    if (N[col][col] == 0.0) throw fit_error("degenerate extrapolation design");
    for (int q = col + 1; q <= d + 1; ++q) N[col][q] /= N[col][col];
    N[col][col] = 1.0;
    for (int row = 0; row <= d; ++row) {
      if (row == col) continue;
      const double f = N[row][col];
      if (f == 0.0) continue;
      for (int q = col; q <= d + 1; ++q) N[row][q] -= f * N[col][q];
    }
  }
  return N[0][d + 1];
}

} // namespace detail

/// Scattering wave function scaled by the pole factor,
///   psi~(k,r) = -[2|alpha_ref| (alpha_ref^2 + k^2)]^{1/2} v(k,r)/r.
/// Below r = 10 h the removable 0/0 is replaced by the origin derivative.
/// alpha_ref may be negative (virtual level); only |alpha_ref| enters.
inline double modified_scattering(const ScatteringState& s, double alpha_ref, double r) {
  if (alpha_ref == 0.0)
    throw domain_error("modified_scattering: alpha_ref must be nonzero");
  if (r < 0.0) throw domain_error("modified_scattering: negative radius");
  const double scale = detail::sqrt_scale(alpha_ref, s.k);
  const double psi = r < 10.0 * s.grid.step() ? s.dv_at_origin() : s.v_at(r) / r;
  return -scale * psi;
}

/// Ratio R(k,r) = -[2 alpha (alpha^2+k^2)]^{1/2} v(k,r) / u_alpha(r).
/// Undefined within a relative band of 1e-10 around nodes of u.
inline double ratio(const BoundState& b, const ScatteringState& s, double r) {
  if (!(b.alpha > 0.0)) throw domain_error("ratio: bound state required");
  if (!b.grid.same_mesh(s.grid)) throw configuration_error("ratio: grids differ");
  const double scale = detail::sqrt_scale(b.alpha, s.k);
  if (r < 10.0 * b.grid.step()) return -scale * s.dv_at_origin() / b.du_at_origin();
  const double ur = b.u_at(r);
  if (std::abs(ur) < 1e-10 * b.u_abs_max())
    throw numerical_error("ratio: r falls on a node of the bound state");
  return -scale * s.v_at(r) / ur;
}

/// Coefficients of R(k,r) = 1 + R1(r) x + R2(r) x^2 + ... fitted against
/// x = alpha^2 + k^2 over a set of scattering states.
struct RatioSeries {
  std::vector<double> r;
  std::vector<double> R1, R2;
  std::vector<double> R1_err, R2_err;
  std::vector<double> residual; // weighted rms misfit of R-1 per radius
  std::vector<double> k_samples;
  std::vector<double> x; // design values alpha^2 + k^2
};

inline RatioSeries fit_ratio_series_from_states(const BoundState& b,
                                                const std::vector<ScatteringState>& states,
                                                const std::vector<double>& r_grid) {
  if (states.size() < 4)
    throw configuration_error("fit_ratio_series: need at least 4 wavenumber samples");
  std::vector<double> x(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    x[i] = b.alpha * b.alpha + states[i].k * states[i].k;
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  if (*xmax_it < 4.0 * *xmin_it)
    throw configuration_error("fit_ratio_series: x must span at least a factor 4");

  RatioSeries out;
  out.r = r_grid;
  out.k_samples.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out.k_samples[i] = states[i].k;
  out.x = x;
  out.R1.resize(r_grid.size());
  out.R2.resize(r_grid.size());
  out.R1_err.resize(r_grid.size());
  out.R2_err.resize(r_grid.size());
  out.residual.resize(r_grid.size());

  // truncation of the series is the dominant misfit, so weight toward small x
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = 1.0 / (x[i] * x[i] * x[i] * x[i]);

  for (std::size_t j = 0; j < r_grid.size(); ++j) {
    std::vector<std::array<double, 2>> X(x.size());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      X[i] = {x[i], x[i] * x[i]};
      y[i] = ratio(b, states[i], r_grid[j]) - 1.0;
    }
    auto fit = detail::weighted_ls<2>(X, y, w);
    if (fit.cond > 1e8)
      throw fit_error("fit_ratio_series: ill-conditioned design, widen the x span");
    out.R1[j] = fit.coeff[0];
    out.R2[j] = fit.coeff[1];
    out.R1_err[j] = fit.stderr_[0];
    out.R2_err[j] = fit.stderr_[1];
    out.residual[j] = fit.weighted_rms;
  }
  return out;
}

/// Default wavenumber samples for series fits, in units of the inverse
/// potential scale: small enough to stay inside the single-pole convergence
/// region for every scenario treated here, wide enough for a factor-8 x span.
inline std::vector<double> default_ratio_k_samples() {
  return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
}

/// Per-wavenumber scattering solves; independent, so they run in parallel
/// under the WAVEPOLE_THREADS cap.
inline std::vector<ScatteringState> scattering_sweep(const PotentialModel& model,
                                                     const std::vector<double>& k_samples,
                                                     const RadialGrid& grid) {
  std::vector<std::optional<ScatteringState>> slots(k_samples.size());
  parallel_for(k_samples.size(), [&](std::size_t i) {
    slots[i].emplace(scattering_state(model, k_samples[i], grid));
  });
  std::vector<ScatteringState> states;
  states.reserve(slots.size());
  for (auto& s : slots) states.push_back(std::move(*s));
  return states;
}

/// Numeric-path fit: solves the scattering problem at each wavenumber sample.
inline RatioSeries fit_ratio_series(const PotentialModel& model, const BoundState& b,
                                    const std::vector<double>& r_grid,
                                    const std::vector<double>& k_samples) {
  return fit_ratio_series_from_states(b, scattering_sweep(model, k_samples, b.grid),
                                      r_grid);
}

/// Truncated reference polynomials for R1(r). `truncated` flags radii where
/// the highest retained term is no longer small against the leading one.
struct ReferenceValue {
  double value = 0.0;
  bool truncated = false;
};

inline ReferenceValue r1_reference_yamaguchi(double beta, double alpha, double r) {
  const double c0 = 3.0 / (8.0 * beta * (beta + alpha));
  const double c1 = 1.0 / (4.0 * beta);
  const double c2 = -(beta - alpha) / (8.0 * beta);
  ReferenceValue out;
  out.value = c0 + c1 * r + c2 * r * r;
  out.truncated = std::abs(c2) * r * r > 1e-2 * std::abs(c0);
  return out;
}

inline ReferenceValue r1_reference_bargmann(double beta, double alpha, double r) {
  const double w = beta * beta - alpha * alpha;
  const double c0 = 1.0 / (2.0 * w);
  const double c2 = -1.0 / 6.0;
  const double c4 = -(2.0 * beta * beta - 3.0 * alpha * alpha) / 90.0;
  const double r2 = r * r;
  ReferenceValue out;
  out.value = c0 + c2 * r2 + c4 * r2 * r2;
  out.truncated = std::abs(c4) * r2 * r2 > 1e-2 * std::abs(c0);
  return out;
}

inline ReferenceValue r2_reference_bargmann(double beta, double alpha, double r) {
  const double w = beta * beta - alpha * alpha;
  const double r2 = r * r;
  const double c0 = -1.0 / (8.0 * w * w);
  const double c2 = -1.0 / (12.0 * w);
  const double c4 = -(beta * beta - 3.0 * alpha * alpha) / (360.0 * w);
  ReferenceValue out;
  out.value = c0 + c2 * r2 + c4 * r2 * r2;
  out.truncated = std::abs(c4) * r2 * r2 > 1e-2 * std::abs(c0);
  return out;
}

inline ReferenceValue r1_reference_well(double U0, double a, double alpha, double r) {
  const double c0 = a * a / (4.0 * (1.0 + alpha * a)) -
                    (4.0 + alpha * a) / (4.0 * (U0 - alpha * alpha));
  const double c2 = -1.0 / 6.0;
  ReferenceValue out;
  out.value = c0 + c2 * r * r;
  out.truncated = std::abs(c2) * r * r > 1e-2 * std::abs(c0);
  return out;
}

enum class ReferenceKind { Yamaguchi, Bargmann, SphericalWell };

struct ReferenceParams {
  double beta = 0.0, alpha = 0.0; // Yamaguchi / Bargmann
  double U0 = 0.0, a = 0.0;       // spherical well (alpha shared)
};

inline ReferenceValue r1_reference(ReferenceKind kind, const ReferenceParams& p,
                                   double r) {
  switch (kind) {
    case ReferenceKind::Yamaguchi: return r1_reference_yamaguchi(p.beta, p.alpha, r);
    case ReferenceKind::Bargmann: return r1_reference_bargmann(p.beta, p.alpha, r);
    case ReferenceKind::SphericalWell: return r1_reference_well(p.U0, p.a, p.alpha, r);
  }
  throw domain_error("r1_reference: unknown kind");
}

/// Extrapolates the scaled scattering functions to the bound level and
/// returns the worst relative deviation from -u_alpha(r) over the probes:
/// equivalently |R(x -> 0, r) - 1| after polynomial extrapolation in x.
inline double theorem_limit_check(const BoundState& b,
                                  const std::vector<ScatteringState>& states,
                                  const std::vector<double>& probes) {
  if (states.size() < 4)
    throw configuration_error("theorem_limit_check: need at least 4 samples");
  std::vector<double> x(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    x[i] = b.alpha * b.alpha + states[i].k * states[i].k;
  const int degree = std::min<int>(4, static_cast<int>(states.size()) - 2);
  double worst = 0.0;
  for (double r : probes) {
    std::vector<double> y(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) y[i] = ratio(b, states[i], r);
    const double limit = detail::extrapolate_to_zero(x, y, degree);
    worst = std::max(worst, std::abs(limit - 1.0));
  }
  return worst;
}

inline double theorem_limit_check(const PotentialModel& model, const BoundState& b,
                                  const std::vector<double>& probes,
                                  const std::vector<double>& k_samples) {
  return theorem_limit_check(b, scattering_sweep(model, k_samples, b.grid), probes);
}

/// First radius where the scaled scattering function crosses the bound one,
/// R(k, r*) = 1, searched in the first inter-node region of u. Bisection on
/// the interpolated samples to |dr| < 1e-4. No sign change -> empty result.
inline std::optional<double> crossover_radius(const BoundState& b,
                                              const ScatteringState& s) {
  const double h = b.grid.step();
  // search window: from just outside the origin band to the first node of u
  // (or the range plus a few decay lengths for a nodeless state)
  double r_end = b.grid.r_max() - h;
  if (b.node_count > 0) {
    for (std::size_t i = 2; i < b.u.size(); ++i) {
      if (b.u[i] == 0.0 || std::signbit(b.u[i]) != std::signbit(b.u[i - 1])) {
        r_end = b.grid.r(i - 1) - 5.0 * h;
        break;
      }
    }
  } else {
    r_end = std::min(r_end, s.grid.r(s.i_free) + 3.0 / b.alpha);
  }
  const double r_begin = 10.0 * h;
  if (r_end <= r_begin) return std::nullopt;

  auto f = [&](double r) { return ratio(b, s, r) - 1.0; };
  double rp = r_begin, fp = f(rp);
  const std::size_t steps = static_cast<std::size_t>((r_end - r_begin) / h);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double r = r_begin + static_cast<double>(i) * h;
    const double fr = f(r);
    if (fr == 0.0) return r;
    if (std::signbit(fr) != std::signbit(fp)) {
      double lo = rp, hi = r;
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(fp))
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    rp = r;
    fp = fr;
  }
  return std::nullopt;
}

inline std::optional<double> crossover_radius(const PotentialModel& model,
                                              const BoundState& b, double k) {
  return crossover_radius(b, scattering_state(model, k, b.grid));
}

/// Complex outgoing-wave approximation near the pole:
///   psi+(k,r) = -(2 alpha)^{-1/2} psi_alpha(r) / (alpha + i k).
inline std::complex<double> complex_outgoing_approx(const BoundState& b, double k,
                                                    double r) {
  if (!(b.alpha > 0.0))
    throw domain_error("complex_outgoing_approx: requires a true bound state");
  if (!(k > 0.0)) throw domain_error("complex_outgoing_approx: k must be positive");
  const std::complex<double> denom(b.alpha, k);
  return -b.psi_at(r) / (std::sqrt(2.0 * b.alpha) * denom);
}

/// Sign arbitration for the well's R1(0): the fitted value against the
/// truncated reference polynomial and against the qualitative expectation
/// (scaled scattering functions start above a nodeless lightly bound level,
/// below a one-node level).
struct WellR1SignReport {
  double fitted_r1_0 = 0.0;
  double fitted_stderr = 0.0;
  double reference_r1_0 = 0.0;
  bool fitted_positive = false;
  bool reference_positive = false;
  bool expected_positive = false; // from the level's node count
  bool matches_reference = false;
  bool matches_expected = false;
};

inline WellR1SignReport well_r1_sign_report(const PotentialModel& model,
                                            const BoundState& b,
                                            const std::vector<double>& k_samples) {
  if (model.kind() != PotentialKind::SphericalWell)
    throw domain_error("well_r1_sign_report: spherical well only");
  RatioSeries series = fit_ratio_series(model, b, {0.0}, k_samples);
  WellR1SignReport rep;
  rep.fitted_r1_0 = series.R1[0];
  rep.fitted_stderr = series.R1_err[0];
  rep.reference_r1_0 =
      r1_reference_well(model.well_depth(), model.well_radius(), b.alpha, 0.0).value;
  rep.fitted_positive = rep.fitted_r1_0 > 0.0;
  rep.reference_positive = rep.reference_r1_0 > 0.0;
  rep.expected_positive = b.node_count == 0;
  rep.matches_reference = rep.fitted_positive == rep.reference_positive;
  rep.matches_expected = rep.fitted_positive == rep.expected_positive;
  return rep;
}

} // namespace wavepole
