#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "wavepole/errors.hpp"
#include "wavepole/grid.hpp"
#include "wavepole/potentials.hpp"
#include "wavepole/solver.hpp"

// Closed-form solutions for the soluble models. These double as oracles for
// the numerical engine and are the only handler of the non-local separable
// kernel, which the grid integrator rejects.

namespace wavepole {

namespace detail {

// Root function for the well eigencondition kappa cot(kappa a) = -alpha,
// regularized so it stays finite where sin(kappa a) vanishes:
//   g(alpha) = cos(kappa a) + alpha a sinc(kappa a),  kappa = sqrt(U0 - alpha^2).
inline double well_level_function(double U0, double a, double alpha) {
  const double kap2 = U0 - alpha * alpha;
  if (kap2 <= 0.0) throw domain_error("well level function: |alpha| >= sqrt(U0)");
  const double x = a * std::sqrt(kap2);
  const double sinc = x != 0.0 ? std::sin(x) / x : 1.0;
  return std::cos(x) + alpha * a * sinc;
}

inline std::vector<double> well_scan_roots(double U0, double a, double lo, double hi) {
  constexpr int kScan = 4000;
  auto g = [&](double al) { return well_level_function(U0, a, al); };
  std::vector<double> roots;
  double xp = lo, fp = g(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    const double fx = g(x);
    if (fx == 0.0)
      roots.push_back(x);
    else if (fp != 0.0 && std::signbit(fx) != std::signbit(fp))
      roots.push_back(refine_root(g, xp, x, fp, fx, 1e-14, 200));
    xp = x;
    fp = fx;
  }
  return roots;
}

} // namespace detail

/// All real solutions of sqrt(U0 - alpha^2) cot(a sqrt(U0 - alpha^2)) = -alpha.
/// Bound roots lie in (0, sqrt(U0)); with include_virtual the negative-alpha
/// roots (exponentially growing exterior solution) are appended.
inline std::vector<double> well_alpha_roots(double U0, double a,
                                            bool include_virtual = false) {
  if (!(U0 > 0.0 && a > 0.0)) throw domain_error("well_alpha_roots: U0, a must be > 0");
  const double edge = std::sqrt(U0) * (1.0 - 1e-12);
  std::vector<double> out = detail::well_scan_roots(U0, a, 1e-12, edge);
  std::sort(out.begin(), out.end(), std::greater<>()); // deepest level first
  if (include_virtual) {
    std::vector<double> virt = detail::well_scan_roots(U0, a, -edge, -1e-12);
    std::sort(virt.begin(), virt.end(), std::greater<>());
    out.insert(out.end(), virt.begin(), virt.end());
  }
  return out;
}

/// Closed-form normalized bound level of the spherical well.
///
/// Interior A sin(kappa r), exterior N_as e^{-alpha r}; A^2 = 2 alpha/(1 + a alpha)
/// follows from the unit norm integral, and the sign keeps N_as > 0.
struct WellBound {
  double U0 = 0, a = 0, alpha = 0, kappa = 0, A = 0, N_as = 0;
  int node_count = 0;

  double u(double r) const {
    return r <= a ? A * std::sin(kappa * r) : N_as * std::exp(-alpha * r);
  }
  double du(double r) const {
    return r <= a ? A * kappa * std::cos(kappa * r) : -alpha * N_as * std::exp(-alpha * r);
  }
};

inline WellBound well_bound_closed(double U0, double a, double alpha) {
  if (std::abs(detail::well_level_function(U0, a, alpha)) > 1e-6)
    throw domain_error("well_bound_closed: alpha is not an eigen-wavenumber");
  WellBound wb;
  wb.U0 = U0;
  wb.a = a;
  wb.alpha = alpha;
  wb.kappa = std::sqrt(U0 - alpha * alpha);
  const double s = std::sin(wb.kappa * a);
  const double mag = std::sqrt(2.0 * alpha / (1.0 + a * alpha));
  wb.A = s >= 0.0 ? mag : -mag;
  wb.N_as = wb.A * s * std::exp(alpha * a);
  wb.node_count = static_cast<int>(std::floor(wb.kappa * a / std::numbers::pi));
  return wb;
}

/// Closed-form standing-wave scattering solution of the well.
///
/// The phase is the continuous branch anchored to 0 at threshold; it is built
/// from the interior node count against the zero-energy level count, exactly
/// as the numerical solver does.
struct WellScattering {
  double U0 = 0, a = 0, k = 0, K = 0, delta = 0, B = 0;

  double v(double r) const {
    return r <= a ? B * std::sin(K * r) : std::sin(k * r + delta) / k;
  }
  double dv(double r) const {
    return r <= a ? B * K * std::cos(K * r) : std::cos(k * r + delta);
  }
};

inline WellScattering well_scattering_closed(double U0, double a, double k) {
  if (!(k > 0.0)) throw domain_error("well_scattering_closed: k must be positive");
  WellScattering ws;
  ws.U0 = U0;
  ws.a = a;
  ws.k = k;
  ws.K = std::sqrt(U0 + k * k);
  const double Ka = ws.K * a;
  const int n_in = static_cast<int>(std::floor(Ka / std::numbers::pi));
  double phi = std::atan2(k * std::sin(Ka), ws.K * std::cos(Ka));
  if (phi < 0.0) phi += std::numbers::pi;
  const double K0a = std::sqrt(U0) * a;
  int n0 = static_cast<int>(std::floor(K0a / std::numbers::pi));
  if (std::tan(K0a) < 0.0) ++n0;
  ws.delta = (n_in - n0) * std::numbers::pi + phi - k * a;
  const double s = std::sin(Ka), c = std::cos(Ka);
  // amplitude from continuity; switch to the derivative relation near nodes
  ws.B = std::abs(s) > 1e-6 ? std::sin(k * a + ws.delta) / (k * s)
                            : std::cos(k * a + ws.delta) / (ws.K * c);
  return ws;
}

/// Analytic continuation of the well S-matrix,
///   S(k) = e^{-2ika} (K cos Ka + i k sin Ka) / (K cos Ka - i k sin Ka),
/// K = sqrt(U0 + k^2). Unimodular on the real axis; poles at k = i alpha for
/// every root of the eigencondition (bound and virtual).
inline std::complex<double> well_smatrix(double U0, double a, std::complex<double> k) {
  for (double root : well_alpha_roots(U0, a, true)) {
    if (std::abs(k - std::complex<double>(0.0, root)) < 1e-8)
      throw near_pole_error("well_smatrix: evaluation within 1e-8 of a pole");
  }
  const std::complex<double> K = std::sqrt(std::complex<double>(U0, 0.0) + k * k);
  const std::complex<double> Ka = K * a;
  const std::complex<double> num = K * std::cos(Ka) + std::complex<double>(0, 1) * k * std::sin(Ka);
  const std::complex<double> den = K * std::cos(Ka) - std::complex<double>(0, 1) * k * std::sin(Ka);
  return std::exp(std::complex<double>(0, -2.0) * k * a) * num / den;
}

/// Closed-form bound solution of the separable kernel:
/// u(r) = c (e^{-alpha r} - e^{-beta r}), unit-normalized, N_as = c > 0.
struct YamaguchiBound {
  double beta = 0, alpha = 0, c = 0;

  double u(double r) const {
    return c * (std::exp(-alpha * r) - std::exp(-beta * r));
  }
  double du(double r) const {
    return c * (-alpha * std::exp(-alpha * r) + beta * std::exp(-beta * r));
  }
  double d2u(double r) const {
    return c * (alpha * alpha * std::exp(-alpha * r) - beta * beta * std::exp(-beta * r));
  }
};

inline YamaguchiBound yamaguchi_bound_closed(const SeparableModel& m) {
  const double b = m.beta(), al = m.alpha_b();
  YamaguchiBound yb;
  yb.beta = b;
  yb.alpha = al;
  yb.c = std::sqrt(2.0 * al * b * (al + b)) / (b - al);
  return yb;
}

/// Closed-form standing-wave solution of the separable kernel:
///   v(k,r) = [sin(kr + delta) - sin(delta) e^{-beta r}] / k,
///   tan(delta) = lambda k / [(beta^2+k^2)^2 + lambda (k^2-beta^2)/(2 beta)].
/// The branch is continuous in k and anchored to 0 at threshold (one unit of
/// pi subtracted when the strength supports the bound level).
struct YamaguchiScattering {
  double beta = 0, lambda = 0, k = 0, delta = 0;

  double v(double r) const {
    return (std::sin(k * r + delta) - std::sin(delta) * std::exp(-beta * r)) / k;
  }
  double dv(double r) const {
    return (k * std::cos(k * r + delta) + beta * std::sin(delta) * std::exp(-beta * r)) / k;
  }
};

inline YamaguchiScattering yamaguchi_scattering_general(double beta, double lambda,
                                                        double k) {
  if (!(beta > 0.0) || !(lambda >= 0.0))
    throw domain_error("yamaguchi scattering: beta > 0 and lambda >= 0 required");
  if (!(k > 0.0)) throw domain_error("yamaguchi scattering: k must be positive");
  YamaguchiScattering ys;
  ys.beta = beta;
  ys.lambda = lambda;
  ys.k = k;
  const double b2k2 = beta * beta + k * k;
  const double num = lambda * k;
  const double den = b2k2 * b2k2 + lambda * (k * k - beta * beta) / (2.0 * beta);
  double delta = std::atan2(num, den);
  if (lambda > SeparableModel::lambda_critical(beta)) delta -= std::numbers::pi;
  ys.delta = delta;
  return ys;
}

inline YamaguchiScattering yamaguchi_scattering_closed(const SeparableModel& m, double k) {
  return yamaguchi_scattering_general(m.beta(), m.lambda(), k);
}

/// S-matrix of the separable kernel on the positive imaginary axis k = i q,
/// where it is real: S(iq) = (d - lambda q)/(d + lambda q). Divergence as
/// q -> alpha_b exhibits the bound-state pole without complex continuation.
inline double yamaguchi_smatrix_imag_axis(const SeparableModel& m, double q) {
  const double beta = m.beta(), lambda = m.lambda();
  const double k2 = -q * q;
  const double b2k2 = beta * beta + k2;
  const double d = b2k2 * b2k2 + lambda * (k2 - beta * beta) / (2.0 * beta);
  const double den = d + lambda * q;
  if (den == 0.0) throw near_pole_error("yamaguchi S-matrix evaluated at the pole");
  return (d - lambda * q) / den;
}

// ---- grid adapters: closed forms packaged as solver-compatible states ----

inline BoundState well_bound_state_closed(double U0, double a, double alpha,
                                          const RadialGrid& grid) {
  const WellBound wb = well_bound_closed(U0, a, alpha);
  BoundState st{alpha, wb.N_as, wb.node_count, grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) st.u[i] = wb.u(grid.r(i));
  for (double ui : st.u) st.u_max = std::max(st.u_max, std::abs(ui));
  return st;
}

inline ScatteringState well_scattering_state_closed(double U0, double a, double k,
                                                    const RadialGrid& grid) {
  const WellScattering ws = well_scattering_closed(U0, a, k);
  const int m_w = static_cast<int>(std::ceil(ws.delta / std::numbers::pi - 0.5));
  ScatteringState st{k,
                     ws.delta - m_w * std::numbers::pi,
                     m_w,
                     grid,
                     std::vector<double>(grid.size()),
                     grid.index_near(a) + 1};
  for (std::size_t i = 0; i < grid.size(); ++i) st.v[i] = ws.v(grid.r(i));
  return st;
}

inline BoundState yamaguchi_bound_state(const SeparableModel& m, const RadialGrid& grid) {
  const YamaguchiBound yb = yamaguchi_bound_closed(m);
  BoundState st{m.alpha_b(), yb.c, 0, grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) st.u[i] = yb.u(grid.r(i));
  for (double ui : st.u) st.u_max = std::max(st.u_max, std::abs(ui));
  return st;
}

inline ScatteringState yamaguchi_scattering_state(const SeparableModel& m, double k,
                                                  const RadialGrid& grid) {
  const YamaguchiScattering ys = yamaguchi_scattering_closed(m, k);
  const int m_w = static_cast<int>(std::ceil(ys.delta / std::numbers::pi - 0.5));
  // form-factor range: e^{-beta r} dead to 1e-12 of its peak
  const double rc = std::log(1e12) / m.beta();
  ScatteringState st{k,
                     ys.delta - m_w * std::numbers::pi,
                     m_w,
                     grid,
                     std::vector<double>(grid.size()),
                     std::min(grid.size() - 1, grid.index_near(rc) + 1)};
  for (std::size_t i = 0; i < grid.size(); ++i) st.v[i] = ys.v(grid.r(i));
  return st;
}

} // namespace wavepole
