#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "wavepole/errors.hpp"
#include "wavepole/parallel.hpp"
#include "wavepole/potentials.hpp"
#include "wavepole/solver.hpp"

// Two-potential formula and its consistency with bound-state perturbation
// theory near a weakly bound level. Reduced units absorb the 2m/hbar^2
// factors: matrix elements of the reduced potential are plain radial
// integrals, and the first-order level shift closes E = -alpha^2 exactly,
// which fixes every constant below.

namespace wavepole {

/// First-order shift of the binding energy: dE = Integral u^2 U1 dr.
inline double bound_energy_shift(const BoundState& b, const PotentialModel& V1) {
  if (b.grid.r_max() <= V1.range_cutoff())
    throw configuration_error("bound_energy_shift: grid does not cover V1");
  std::vector<double> integrand(b.u.size());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = b.u[i] * b.u[i] * V1.value(b.grid.r(i));
  return detail::simpson(integrand, b.grid.step());
}

inline double bound_energy_shift(const BoundState&, const SeparableModel&) {
  throw unsupported_error("bound_energy_shift: local perturbations only");
}

/// First-order amplitude change from an added potential,
///   df = -e^{2 i delta0} Integral chi_k(r)^2 U1(r) dr,
/// chi_k being the real standing-wave solution of the unperturbed problem.
inline std::complex<double> two_potential_delta_f(const ScatteringState& chi,
                                                  const PotentialModel& V1) {
  if (chi.grid.r_max() <= V1.range_cutoff())
    throw configuration_error("two_potential_delta_f: grid does not cover V1");
  std::vector<double> integrand(chi.v.size());
  for (std::size_t i = 0; i < integrand.size(); ++i)
    integrand[i] = chi.v[i] * chi.v[i] * V1.value(chi.grid.r(i));
  const double I = detail::simpson(integrand, chi.grid.step());
  const std::complex<double> phase =
      std::exp(std::complex<double>(0.0, 2.0 * chi.delta_total()));
  return -phase * I;
}

inline std::complex<double> two_potential_delta_f(const PotentialModel& model0,
                                                  const PotentialModel& V1, double k,
                                                  const RadialGrid& grid) {
  return two_potential_delta_f(scattering_state(model0, k, grid), V1);
}

inline std::complex<double> two_potential_delta_f(const SeparableModel&,
                                                  const PotentialModel&, double,
                                                  const RadialGrid&) {
  throw unsupported_error("two_potential_delta_f: local models only");
}

/// The same amplitude change with chi_k^2 replaced by the pole-dominated form
/// u_alpha^2 / (2 alpha (alpha^2 + k^2)).
inline std::complex<double> delta_f_pole_approx(const BoundState& b,
                                                const PotentialModel& V1, double k,
                                                double delta0) {
  const double dE = bound_energy_shift(b, V1);
  const std::complex<double> phase = std::exp(std::complex<double>(0.0, 2.0 * delta0));
  return -phase * dE / (2.0 * b.alpha * (b.alpha * b.alpha + k * k));
}

/// First-order eigen-wavenumber shift. The coefficient is fixed by requiring
/// -alpha^2 = -alpha0^2 + dE at first order.
inline double alpha_shift_first_order(double alpha0, double dE) {
  if (!(alpha0 > 0.0)) throw domain_error("alpha_shift_first_order: alpha0 must be > 0");
  return alpha0 * (1.0 - dE / (2.0 * alpha0 * alpha0));
}

/// Scattering-length form of the S-matrix near a weakly bound pole.
inline std::complex<double> scattering_length_smatrix(double alpha, double k) {
  if (!(k > 0.0)) throw domain_error("scattering_length_smatrix: k must be positive");
  return std::complex<double>(alpha, -k) / std::complex<double>(alpha, k);
}

struct PerturbationRow {
  double eps = 0.0;
  double dE_pert = 0.0, dE_exact = 0.0, dE_err = 0.0;
  double max_phase_err = 0.0;
  double alpha_pert = 0.0, alpha_exact = 0.0, alpha_err = 0.0;
};

/// Error constants estimated by a Richardson ratio from the two smallest
/// nonzero scales: err ~ C eps^2.
struct ConsistencyReport {
  std::vector<PerturbationRow> rows;
  double C_energy = 0.0, C_phase = 0.0, C_alpha = 0.0;
};

/// Compares first-order perturbation theory against exact re-solves of the
/// combined problem U0 + eps U1 for every scale in eps_list.
inline ConsistencyReport consistency_report(const PotentialModel& model0,
                                            const PotentialModel& profile,
                                            const std::vector<double>& eps_list,
                                            const std::vector<double>& k_list,
                                            const RadialGrid& grid) {
  if (count_bound_states(model0, grid) != 1)
    throw domain_error("consistency_report: the base model must hold exactly one level");
  std::vector<BoundState> base = find_bound_states(model0, grid, 1e-4, 10.0, 2);
  if (base.size() != 1)
    throw numerical_error("consistency_report: base level not located");
  const BoundState& b0 = base.front();
  const double alpha0 = b0.alpha;
  const double dE_unit = bound_energy_shift(b0, profile); // linear in eps

  std::vector<ScatteringState> chi0;
  chi0.reserve(k_list.size());
  for (double k : k_list) chi0.push_back(scattering_state(model0, k, grid));

  ConsistencyReport rep;
  rep.rows.resize(eps_list.size());
  parallel_for(eps_list.size(), [&](std::size_t idx) {
    const double eps = eps_list[idx];
    PerturbationRow row;
    row.eps = eps;
    row.dE_pert = eps * dE_unit;
    PotentialModel combined = PotentialModel::combine({{1.0, model0}, {eps, profile}});
    std::vector<BoundState> solved =
        find_bound_states(combined, grid, std::max(1e-4, alpha0 / 4.0), 4.0 * alpha0, 2);
    if (solved.size() != 1)
      throw numerical_error("consistency_report: perturbed level not isolated");
    const double alpha_ex = solved.front().alpha;
    row.alpha_exact = alpha_ex;
    row.dE_exact = -(alpha_ex * alpha_ex) + alpha0 * alpha0;
    row.dE_err = std::abs(row.dE_pert - row.dE_exact);
    row.alpha_pert = alpha_shift_first_order(alpha0, row.dE_pert);
    row.alpha_err = std::abs(row.alpha_pert - alpha_ex);
    for (std::size_t j = 0; j < k_list.size(); ++j) {
      const double k = k_list[j];
      const std::complex<double> df =
          two_potential_delta_f(chi0[j], profile) * eps;
      const double d0 = chi0[j].delta_total();
      const std::complex<double> corr =
          1.0 + 2.0 * std::complex<double>(0.0, k) * df *
                    std::exp(std::complex<double>(0.0, -2.0 * d0));
      const double d_pert = d0 + 0.5 * std::arg(corr);
      const double d_exact = scattering_state(combined, k, grid).delta_total();
      row.max_phase_err = std::max(row.max_phase_err, std::abs(d_pert - d_exact));
    }
    rep.rows[idx] = row;
  });

  // Richardson constants from the two smallest nonzero scales
  std::vector<const PerturbationRow*> nz;
  for (const auto& r : rep.rows)
    if (r.eps != 0.0) nz.push_back(&r);
  std::sort(nz.begin(), nz.end(), [](const PerturbationRow* a, const PerturbationRow* b) {
    return std::abs(a->eps) < std::abs(b->eps);
  });
  if (!nz.empty()) {
    const PerturbationRow* s = nz.front();
    rep.C_energy = s->dE_err / (s->eps * s->eps);
    rep.C_phase = s->max_phase_err / (s->eps * s->eps);
    rep.C_alpha = s->alpha_err / (s->eps * s->eps);
  }
  return rep;
}

} // namespace wavepole
