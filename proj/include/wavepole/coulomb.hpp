#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "wavepole/errors.hpp"

// Coulomb origin identities. With hbar^2/2m = 1 the attractive Coulomb
// problem is set by a single inverse length kappa_c, the bound levels sit at
// alpha_n = kappa_c / n, and the dimensionless parameter for a scattering
// state of wavenumber k is eta = -kappa_c / k.

namespace wavepole::coulomb {

/// [psi(k,0)]^2 = 2 pi eta / (e^{2 pi eta} - 1), continued through eta = 0
/// (value 1) and overflow-safe for large |eta|.
inline double gamow_factor(double eta) {
  const double x = 2.0 * std::numbers::pi * eta;
  if (x == 0.0) return 1.0;
  if (x > 700.0) {
    const double e = std::exp(-x); // e^x overflows; rewrite with e^{-x}
    return x * e / (1.0 - e);
  }
  if (x < -700.0) return -x; // e^x vanishes
  return x / std::expm1(x);
}

/// Partial pole sum for the same quantity:
///   -pi eta + 1 + 2 sum_{n=1..N} 1/(1 + n^2/eta^2),
/// together with the analytic estimate 2 eta^2 / N of the dropped tail.
struct GamowSeries {
  double partial_sum = 0.0;
  double tail_estimate = 0.0;

  double corrected() const { return partial_sum + tail_estimate; }
};

inline GamowSeries gamow_series(double eta, long n_terms) {
  if (n_terms < 1) throw domain_error("gamow_series: need at least one term");
  GamowSeries out;
  const double eta2 = eta * eta;
  double sum = 0.0;
  for (long n = n_terms; n >= 1; --n) { // small terms first
    const double nn = static_cast<double>(n);
    sum += eta2 / (eta2 + nn * nn);
  }
  out.partial_sum = -std::numbers::pi * eta + 1.0 + 2.0 * sum;
  out.tail_estimate = 2.0 * eta2 / static_cast<double>(n_terms);
  return out;
}

/// Squared bound wave function at the origin for level n: 4 alpha_n^3.
inline double bound_psi0_sq(int n, double kappa_c) {
  if (n < 1) throw domain_error("coulomb bound level index must be >= 1");
  if (!(kappa_c > 0.0)) throw domain_error("kappa_c must be positive");
  const double an = kappa_c / static_cast<double>(n);
  return 4.0 * an * an * an;
}

/// One term of the pole decomposition, psi_n(0)^2 / (2 alpha_n (alpha_n^2 + k^2)),
/// evaluated at (possibly complex) k^2 for near-pole dominance studies.
inline std::complex<double> pole_term(int n, double kappa_c, std::complex<double> k2) {
  const double an = kappa_c / static_cast<double>(n);
  return bound_psi0_sq(n, kappa_c) / (2.0 * an * (an * an + k2));
}

/// Residual of the pole-decomposition identity
///   gamow(eta(k)) = pi kappa_c / k + 1 + sum_n psi_n(0)^2/(2 alpha_n (alpha_n^2+k^2)),
/// with the dropped tail replaced by its analytic estimate.
inline double pole_decomposition_residual(double k, double kappa_c, long n_terms) {
  if (!(k > 0.0)) throw domain_error("pole_decomposition_residual: k must be positive");
  if (!(kappa_c > 0.0)) throw domain_error("kappa_c must be positive");
  double sum = 0.0;
  for (long n = n_terms; n >= 1; --n)
    sum += pole_term(static_cast<int>(n), kappa_c, k * k).real();
  const double eta = -kappa_c / k;
  const double tail = 2.0 * eta * eta / static_cast<double>(n_terms);
  const double decomposition = std::numbers::pi * kappa_c / k + 1.0 + sum + tail;
  return std::abs(gamow_factor(eta) - decomposition);
}

/// Relative error of keeping only the ground-level pole: demonstrates that no
/// single level dominates the Coulomb enhancement at real wavenumbers.
inline double single_pole_relative_error(double k, double kappa_c) {
  const double exact = gamow_factor(-kappa_c / k);
  const double single = pole_term(1, kappa_c, k * k).real();
  return std::abs(single - exact) / std::abs(exact);
}

} // namespace wavepole::coulomb
