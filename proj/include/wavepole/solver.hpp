#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "wavepole/errors.hpp"
#include "wavepole/grid.hpp"
#include "wavepole/potentials.hpp"

namespace wavepole {

namespace detail {

// Four-point Lagrange interpolation on a uniform mesh.
inline double interp_cubic(const std::vector<double>& y, double h, double r) {
  const std::size_t n = y.size();
  if (n < 4) throw configuration_error("interp: need at least 4 samples");
  double t = r / h;
  auto i = static_cast<std::ptrdiff_t>(std::floor(t));
  i = std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
  const double x = t - static_cast<double>(i); // in [1,2] for interior points
  const double y0 = y[i], y1 = y[i + 1], y2 = y[i + 2], y3 = y[i + 3];
  return y0 * (x - 1) * (x - 2) * (x - 3) / (-6.0) + y1 * x * (x - 2) * (x - 3) / 2.0 +
         y2 * x * (x - 1) * (x - 3) / (-2.0) + y3 * x * (x - 1) * (x - 2) / 6.0;
}

// Derivative at the origin of a regular solution (w ~ c1 r + c3 r^3 + ...),
// eliminating the r^2 and r^4 error terms from the first three samples.
inline double derivative_at_origin(const std::vector<double>& w, double h) {
  const double d1 = w[1] / h, d2 = w[2] / (2.0 * h), d3 = w[3] / (3.0 * h);
  return (15.0 * d1 - 6.0 * d2 + d3) / 10.0;
}

// Centered derivative with the leading ODE correction for w'' = f w.
inline double derivative_centered(double wm, double wp, double h, double f) {
  return (wp - wm) / (2.0 * h) / (1.0 + h * h * f / 6.0);
}

inline int count_sign_changes(const std::vector<double>& w, std::size_t i_begin,
                              std::size_t i_end) {
  int n = 0;
  double prev = 0.0;
  for (std::size_t i = i_begin; i <= i_end && i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (prev != 0.0 && std::signbit(prev) != std::signbit(w[i])) ++n;
    prev = w[i];
  }
  return n;
}

// Numerov sweep for w'' = f w with w[0] = 0, w[1] = h; integrates the first
// n_out points of f. Global accuracy O(h^4).
inline std::vector<double> numerov(const std::vector<double>& f, double h,
                                   std::size_t n_out) {
  std::vector<double> w(n_out, 0.0);
  if (n_out < 2) return w;
  w[0] = 0.0;
  w[1] = h;
  const double c = h * h / 12.0;
  for (std::size_t i = 1; i + 1 < n_out; ++i) {
    const double am = 1.0 - c * f[i - 1];
    const double a0 = 2.0 + 10.0 * c * f[i];
    const double ap = 1.0 - c * f[i + 1];
    w[i + 1] = (a0 * w[i] - am * w[i - 1]) / ap;
  }
  return w;
}

} // namespace detail

/// Normalized bound level of a local potential.
///
/// Conventions: u(0) = 0, Integral u^2 dr = 1 (grid quadrature plus the analytic
/// tail N_as^2 e^{-2 alpha r_max} / (2 alpha)), and the overall sign is fixed by
/// a positive asymptotic constant, u(r) -> N_as e^{-alpha r} with N_as > 0.
struct BoundState {
  double alpha = 0.0;   // tail wavenumber, positive for true bound states
  double N_as = 0.0;    // asymptotic normalization constant
  int node_count = 0;   // radial nodes in (0, infinity)
  RadialGrid grid;
  std::vector<double> u;

  double u_at(double r) const { return detail::interp_cubic(u, grid.step(), r); }
  double du_at_origin() const { return detail::derivative_at_origin(u, grid.step()); }

  // Peak |u|, cached by the producing routines; recomputed when absent.
  double u_abs_max() const {
    if (u_max > 0.0) return u_max;
    double m = 0.0;
    for (double ui : u) m = std::max(m, std::abs(ui));
    return m;
  }

  double u_max = 0.0;

  // Full wave function psi = u/r; the removable singularity at the origin is
  // filled with the derivative u'(0).
  double psi_at(double r) const {
    if (r < 0.5 * grid.step()) return du_at_origin();
    return u_at(r) / r;
  }
};

/// Virtual level: S-matrix pole on the negative imaginary wavenumber axis.
/// The associated solution grows like e^{+|alpha| r}, so it carries no
/// normalized samples.
struct VirtualState {
  double alpha = 0.0; // negative by convention
  int node_count = 0;
};

/// Real standing-wave scattering solution.
///
/// Samples are normalized so that beyond the potential range
///   v(k,r) = sin(k r + delta_total) / k,
/// where delta_total = delta_principal + winding * pi is continuous in k and
/// anchored to 0 at threshold. The principal value is kept in (-pi/2, pi/2].
struct ScatteringState {
  double k = 0.0;
  double delta_principal = 0.0;
  int winding = 0;
  RadialGrid grid;
  std::vector<double> v;
  std::size_t i_free = 0; // first grid index at or beyond the potential range

  double delta_total() const {
    return delta_principal + static_cast<double>(winding) * std::numbers::pi;
  }
  double v_at(double r) const { return detail::interp_cubic(v, grid.step(), r); }
  double dv_at_origin() const { return detail::derivative_at_origin(v, grid.step()); }
};

/// Raw outward integration of w'' = (U - E) w with w(0) = 0, w(h) = h.
/// E is the signed energy: k^2 for scattering, -alpha^2 for bound solutions.
inline std::vector<double> integrate_outward(const PotentialModel& model, double E,
                                             const RadialGrid& grid,
                                             SampleMode mode = SampleMode::Integration) {
  std::vector<double> f = model.samples(grid, mode);
  for (double& fi : f) fi -= E;
  return detail::numerov(f, grid.step(), grid.size());
}

inline std::vector<double> integrate_outward(const SeparableModel&, double,
                                             const RadialGrid&) {
  throw unsupported_error("separable kernels are handled by their closed forms");
}

namespace detail {

struct MatchFrame {
  std::size_t i_match;      // grid index of the matching radius
  std::vector<double> f;    // U - E on [0, i_match + 1], interior continuation
};

// Matching index: the last grid point not beyond the potential range.
inline std::size_t matching_index(const PotentialModel& model, const RadialGrid& grid) {
  const double rc = model.range_cutoff();
  if (grid.r_max() <= rc)
    throw configuration_error("grid does not reach the potential range");
  auto i = static_cast<std::size_t>(std::ceil(rc / grid.step() - 1e-9));
  return std::min(i, grid.size() - 2);
}

// Outward solution of the interior problem up to one step past the matching
// radius, never stepping across a potential jump located there.
inline std::vector<double> integrate_interior(const PotentialModel& model, double E,
                                              const RadialGrid& grid,
                                              std::size_t i_match) {
  std::vector<double> f(i_match + 2);
  const double rm = grid.r(i_match);
  for (std::size_t i = 0; i <= i_match + 1; ++i) {
    const double r = grid.r(i);
    f[i] = model.eval(r, r < rm ? SampleMode::Contract : SampleMode::InteriorExtension) - E;
  }
  return numerov(f, grid.step(), i_match + 2);
}

// Scale-free matching function whose zeros are the eigen-wavenumbers:
// W(alpha) = u'(r_m) + alpha u(r_m), the Wronskian of the outward solution
// with the exact exterior tail e^{-alpha r}.
inline double tail_mismatch(const PotentialModel& model, double alpha,
                            const RadialGrid& grid, std::size_t i_match,
                            std::vector<double>* keep = nullptr) {
  const double E = -alpha * alpha;
  std::vector<double> w = integrate_interior(model, E, grid, i_match);
  // normalize the scan scale so the mismatch stays O(1) across deep wells
  double peak = 0.0;
  for (std::size_t i = 0; i <= i_match; ++i) peak = std::max(peak, std::abs(w[i]));
  if (peak == 0.0) throw numerical_error("outward solution vanished identically");
  const double fm = model.eval(grid.r(i_match), SampleMode::InteriorExtension) - E;
  const double du =
      derivative_centered(w[i_match - 1], w[i_match + 1], grid.step(), fm);
  if (keep) *keep = std::move(w);
  return (du + alpha * w[i_match]) / peak;
}

inline double refine_root(const std::function<double(double)>& f, double lo, double hi,
                          double flo, double fhi, double tol, int max_iter) {
  // bisection until the bracket is small, then secant for the final digits
  double a = lo, b = hi, fa = flo, fb = fhi;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a < 1e4 * tol) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(fa)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
      fb = fm;
    }
  }
  double x0 = a, x1 = b, f0 = fa, f1 = fb;
  for (int it = 0; it < max_iter; ++it) {
    if (f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x2 >= a - (b - a) && x2 <= b + (b - a))) break; // secant left the bracket
    if (std::abs(x2 - x1) < tol) return x2;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f(x2);
  }
  // fall back to plain bisection to the requested tolerance
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a < tol) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(fa)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  throw numerical_error("eigenvalue search did not converge");
}

// Locate all zeros of the tail mismatch in [lo, hi] by a 200-point scan.
inline std::vector<double> mismatch_roots(const PotentialModel& model,
                                          const RadialGrid& grid, std::size_t i_match,
                                          double lo, double hi, std::size_t max_roots) {
  constexpr int kScanPoints = 200;
  constexpr double kTol = 1e-10;
  auto mism = [&](double a) { return tail_mismatch(model, a, grid, i_match); };
  std::vector<double> roots;
  double x_prev = lo, f_prev = mism(lo);
  for (int i = 1; i < kScanPoints && roots.size() < max_roots; ++i) {
    const double x = lo + (hi - lo) * i / (kScanPoints - 1);
    const double fx = mism(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
      roots.push_back(refine_root(mism, x_prev, x, f_prev, fx, kTol, 200));
    }
    x_prev = x;
    f_prev = fx;
  }
  return roots;
}

} // namespace detail

/// All bound states with tail wavenumber inside [alpha_min, alpha_max],
/// normalized and sorted by node count. An empty window yields an empty list.
inline std::vector<BoundState> find_bound_states(const PotentialModel& model,
                                                 const RadialGrid& grid,
                                                 double alpha_min, double alpha_max,
                                                 std::size_t max_levels = 16) {
  if (!(alpha_min > 0.0)) throw domain_error("find_bound_states: alpha_min must be > 0");
  if (alpha_max <= alpha_min) return {};
  const std::size_t i_match = detail::matching_index(model, grid);
  std::vector<double> alphas =
      detail::mismatch_roots(model, grid, i_match, alpha_min, alpha_max, max_levels);

  std::vector<BoundState> states;
  const double h = grid.step();
  const double r_m = grid.r(i_match);
  for (double alpha : alphas) {
    std::vector<double> w;
    detail::tail_mismatch(model, alpha, grid, i_match, &w);
    BoundState st{alpha, 0.0, 0, grid, std::vector<double>(grid.size(), 0.0)};
    for (std::size_t i = 0; i <= i_match; ++i) st.u[i] = w[i];
    const double tail_amp = w[i_match] * std::exp(alpha * r_m);
    for (std::size_t i = i_match + 1; i < grid.size(); ++i)
      st.u[i] = tail_amp * std::exp(-alpha * grid.r(i));
    // normalize: quadrature over the grid plus the analytic tail beyond r_max
    std::vector<double> u2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) u2[i] = st.u[i] * st.u[i];
    const double tail_beyond = tail_amp * tail_amp *
                               std::exp(-2.0 * alpha * grid.r_max()) / (2.0 * alpha);
    const double norm = std::sqrt(detail::simpson(u2, h) + tail_beyond);
    const double sign = w[i_match] > 0.0 ? 1.0 : -1.0;
    for (double& ui : st.u) ui *= sign / norm;
    st.N_as = sign * tail_amp / norm;
    st.node_count = detail::count_sign_changes(st.u, 1, i_match);
    for (double ui : st.u) st.u_max = std::max(st.u_max, std::abs(ui));
    states.push_back(std::move(st));
  }
  std::sort(states.begin(), states.end(),
            [](const BoundState& a, const BoundState& b) {
              return a.node_count < b.node_count;
            });
  return states;
}

/// Virtual levels: zeros of the same matching condition continued to
/// negative alpha (exterior solution growing like e^{+|alpha| r}).
inline std::vector<VirtualState> find_virtual_states(const PotentialModel& model,
                                                     const RadialGrid& grid,
                                                     double alpha_min, double alpha_max,
                                                     std::size_t max_levels = 16) {
  if (!(alpha_min < 0.0 && alpha_max <= 0.0))
    throw domain_error("find_virtual_states: window must be negative");
  const std::size_t i_match = detail::matching_index(model, grid);
  const double hi = std::min(alpha_max, -1e-6);
  std::vector<double> alphas =
      detail::mismatch_roots(model, grid, i_match, alpha_min, hi, max_levels);
  std::vector<VirtualState> states;
  for (double alpha : alphas) {
    std::vector<double> w;
    detail::tail_mismatch(model, alpha, grid, i_match, &w);
    states.push_back({alpha, detail::count_sign_changes(w, 1, i_match)});
  }
  return states;
}

/// Number of bound levels of a local potential, counted from the nodes of the
/// zero-energy regular solution (including a node beyond the range when the
/// exterior line r - a_scat still crosses zero).
inline int count_bound_states(const PotentialModel& model, const RadialGrid& grid) {
  const std::size_t i_c = detail::matching_index(model, grid);
  std::vector<double> f = model.samples(grid, SampleMode::Integration);
  std::vector<double> w = detail::numerov(f, grid.step(), std::min(i_c + 2, grid.size()));
  int n = detail::count_sign_changes(w, 1, i_c);
  // beyond the range the zero-energy solution is the line w(i_c) + w'(i_c)(r - r_c)
  const double du = detail::derivative_centered(w[i_c - 1], w[i_c + 1], grid.step(), 0.0);
  if (w[i_c] != 0.0 && du != 0.0 && std::signbit(w[i_c]) != std::signbit(du)) ++n;
  return n;
}

/// Two-point asymptotic match: samples(r) = C sin(k r + delta) at r1 and r2,
/// with C > 0 and delta in (-pi, pi]. The radii snap to the nearest grid points.
inline std::pair<double, double> extract_phase_shift(const std::vector<double>& samples,
                                                     const RadialGrid& grid, double k,
                                                     double r1, double r2) {
  if (!(k > 0.0)) throw domain_error("extract_phase_shift: k must be positive");
  const std::size_t i1 = grid.index_near(r1), i2 = grid.index_near(r2);
  if (i1 >= samples.size() || i2 >= samples.size() || i1 == i2)
    throw configuration_error("extract_phase_shift: radii outside the sampled range");
  const double x1 = grid.r(i1), x2 = grid.r(i2);
  const double phase_gap = std::remainder(k * (x2 - x1), std::numbers::pi);
  if (std::abs(phase_gap) < 1e-3)
    throw configuration_error(
        "extract_phase_shift: k (r2 - r1) too close to a multiple of pi");
  // samples = P sin(kr) + Q cos(kr); solve the 2x2 system
  const double s1 = std::sin(k * x1), c1 = std::cos(k * x1);
  const double s2 = std::sin(k * x2), c2 = std::cos(k * x2);
  const double det = s1 * c2 - c1 * s2;
  const double P = (samples[i1] * c2 - samples[i2] * c1) / det;
  const double Q = (s1 * samples[i2] - s2 * samples[i1]) / det;
  return {std::atan2(Q, P), std::hypot(P, Q)};
}

/// Outward solve plus asymptotic normalization to v -> sin(kr + delta)/k.
///
/// The continuous-in-k phase branch is fixed without a sweep: the accumulated
/// interior phase (node count plus the local phase at the edge of the range)
/// is compared against the zero-energy level count, anchoring delta -> 0 at
/// threshold. grid.r_max must leave at least one asymptotic wavelength
/// (2 pi / k) beyond the potential range.
inline ScatteringState scattering_state(const PotentialModel& model, double k,
                                        const RadialGrid& grid) {
  if (!(k > 0.0)) throw domain_error("scattering_state: k must be positive");
  const double rc = model.range_cutoff();
  if (grid.r_max() < rc + 2.0 * std::numbers::pi / k)
    throw configuration_error(
        "scattering_state: grid must extend one wavelength past the range");
  const std::size_t i_c = detail::matching_index(model, grid) + 1; // first free point
  std::vector<double> w = integrate_outward(model, k * k, grid);

  // local phase at the first free point
  const double h = grid.step();
  const double du = detail::derivative_centered(w[i_c - 1], w[i_c + 1], h, -k * k);
  double phi = std::atan2(k * w[i_c], du);
  if (phi < 0.0) phi += std::numbers::pi; // local phase modulo pi in [0, pi)
  const int n_in = detail::count_sign_changes(w, 1, i_c);
  const int n_levels = count_bound_states(model, grid);
  const double delta_node = (n_in - n_levels) * std::numbers::pi + phi - k * grid.r(i_c);

  // two-point amplitude/phase match over a quarter wavelength
  const std::size_t quarter =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(0.5 * std::numbers::pi / k / h)));
  const std::size_t i2 = std::min(i_c + quarter, grid.size() - 1);
  auto [delta_raw, amp] =
      extract_phase_shift(w, grid, k, grid.r(i_c), grid.r(i2));

  const double mshift = std::round((delta_node - delta_raw) / std::numbers::pi);
  const double delta_cont = delta_raw + mshift * std::numbers::pi;
  const double sign = (static_cast<long long>(mshift) % 2 == 0) ? 1.0 : -1.0;

  const int m_w = static_cast<int>(std::ceil(delta_cont / std::numbers::pi - 0.5));
  const double scale = sign / (amp * k);
  for (double& wi : w) wi *= scale;
  return ScatteringState{k, delta_cont - m_w * std::numbers::pi, m_w, grid,
                         std::move(w), i_c};
}

/// Least-squares fit of log u against r over [r_lo, r_hi]: returns the
/// asymptotic constant (intercept, signed like the window samples) and
/// checks the slope against -alpha.
inline double asymptotic_normalization(const BoundState& state, double r_lo,
                                       double r_hi) {
  const RadialGrid& g = state.grid;
  const std::size_t i_lo = g.index_near(r_lo), i_hi = g.index_near(r_hi);
  if (i_lo + 4 > i_hi || i_hi >= g.size())
    throw configuration_error("asymptotic_normalization: bad fit window");
  const double sign = state.u[i_lo] > 0.0 ? 1.0 : -1.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = i_lo; i <= i_hi; ++i) {
    const double ui = sign * state.u[i];
    if (!(ui > 0.0))
      throw fit_error("asymptotic_normalization: sign change inside the fit window");
    const double x = g.r(i), y = std::log(ui);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy * sxx - sx * sxy) / denom;
  if (std::abs(slope + state.alpha) > 1e-6 * std::abs(state.alpha))
    throw fit_error("asymptotic_normalization: tail slope disagrees with alpha");
  return sign * std::exp(intercept);
}

/// |Integral_0^inf u_alpha(r) v(k,r) dr|: quadrature over the common grid plus
/// the closed-form exponential-times-sinusoid tail beyond r_max.
inline double orthogonality_defect(const BoundState& b, const ScatteringState& s) {
  if (!b.grid.same_mesh(s.grid))
    throw configuration_error("orthogonality_defect: states on different grids");
  const double h = b.grid.step();
  std::vector<double> prod(b.u.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = b.u[i] * s.v[i];
  double I = detail::simpson(prod, h);
  const double R = b.grid.r_max(), a = b.alpha, k = s.k, d = s.delta_total();
  const double tail = b.N_as / k * std::exp(-a * R) *
                      (a * std::sin(k * R + d) + k * std::cos(k * R + d)) /
                      (a * a + k * k);
  return std::abs(I + tail);
}

/// Default mesh parameters: step 1e-3 in units of the potential scale, range
/// covering the slowest relevant exponential tail / asymptotic wavelength.
inline RadialGrid default_grid(const PotentialModel& model, double alpha_expected,
                               double k_min = 0.0, double step = 1e-3) {
  double span = 20.0 / std::abs(alpha_expected);
  if (k_min > 0.0)
    span = std::max(span, 4.0 * std::numbers::pi / k_min);
  return RadialGrid(step, model.range_cutoff() + span);
}

} // namespace wavepole
