#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wavepole/errors.hpp"
#include "wavepole/grid.hpp"

namespace wavepole {

// Units: hbar^2/2m = 1 throughout, so the reduced potential U(r) = 2m V(r)/hbar^2
// carries 1/length^2 and energies are k^2 (scattering) or -alpha^2 (bound).

enum class PotentialKind { SphericalWell, Bargmann, Tabulated, Composite };

// How the model is sampled on a grid.
//  Contract    - the pointwise definition (well is 0 at r = a, half-open step).
//  Integration - values fed to the ODE integrator; a jump located exactly on a
//                grid point is replaced by the mean of its one-sided limits,
//                which keeps the local stepping error at O(h^3) instead of O(h^2).
//  InteriorExtension - the analytic continuation of the interior profile past
//                the matching radius, used when extracting the interior
//                logarithmic derivative without stepping across the jump.
enum class SampleMode { Contract, Integration, InteriorExtension };

/// Local reduced potential U(r) of finite range.
class PotentialModel {
public:
  static PotentialModel make_spherical_well(double depth, double radius) {
    if (!(depth > 0.0)) throw domain_error("spherical well: depth must be positive");
    if (!(radius > 0.0)) throw domain_error("spherical well: radius must be positive");
    PotentialModel m;
    m.kind_ = PotentialKind::SphericalWell;
    m.p1_ = depth;
    m.p2_ = radius;
    m.cutoff_ = radius;
    return m;
  }

  // U(r) = -2 (beta^2 - alpha_b^2) / (cosh(beta r) - (alpha_b/beta) sinh(beta r))^2,
  // beta > alpha_b > 0. Supports exactly one bound level at wavenumber alpha_b.
  static PotentialModel make_bargmann(double beta, double alpha_b) {
    if (!(beta > alpha_b && alpha_b > 0.0))
      throw domain_error("bargmann: requires beta > alpha_b > 0");
    PotentialModel m;
    m.kind_ = PotentialKind::Bargmann;
    m.p1_ = beta;
    m.p2_ = alpha_b;
    // truncation radius: |U| has fallen to 1e-12 of |U(0)|, i.e. the
    // denominator has grown to 1e6. Solve A e^x + B e^{-x} = 1e6 exactly.
    const double q = alpha_b / beta;
    const double big = 1e6;
    const double A = 0.5 * (1.0 - q), B = 0.5 * (1.0 + q);
    const double y = (big + std::sqrt(big * big - 4.0 * A * B)) / (2.0 * A);
    m.cutoff_ = std::log(y) / beta;
    return m;
  }

  static PotentialModel make_tabulated(std::vector<double> r, std::vector<double> u) {
    if (r.size() != u.size() || r.size() < 2)
      throw domain_error("tabulated: need two equal-length columns with >= 2 rows");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i]) || !std::isfinite(u[i]))
        throw domain_error("tabulated: non-finite sample");
      if (i > 0 && !(r[i] > r[i - 1]))
        throw domain_error("tabulated: radii must be strictly increasing");
    }
    if (r.front() < 0.0) throw domain_error("tabulated: negative radius");
    PotentialModel m;
    m.kind_ = PotentialKind::Tabulated;
    m.cutoff_ = r.back();
    m.tab_r_ = std::move(r);
    m.tab_u_ = std::move(u);
    return m;
  }

  // Weighted sum of local models; the range is the widest of the parts.
  // Used for perturbed problems U0 + eps * U1, which stay exactly solvable
  // by the same machinery.
  static PotentialModel combine(std::vector<std::pair<double, PotentialModel>> parts) {
    if (parts.empty()) throw domain_error("combine: need at least one part");
    PotentialModel m;
    m.kind_ = PotentialKind::Composite;
    m.cutoff_ = 0.0;
    for (const auto& [w, p] : parts) {
      (void)w;
      if (p.kind_ == PotentialKind::Composite)
        throw domain_error("combine: nested composites are not supported");
      m.cutoff_ = std::max(m.cutoff_, p.cutoff_);
    }
    m.parts_ = std::move(parts);
    return m;
  }

  // Two-column CSV (r, U), strictly increasing r, optional header row.
  static PotentialModel from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open potential table: " + path);
    std::vector<double> r, u;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      double rv, uv;
      if (!(row >> rv >> uv)) {
        if (first) { first = false; continue; } // header row
        throw io_error("malformed row in potential table: " + line);
      }
      first = false;
      r.push_back(rv);
      u.push_back(uv);
    }
    return make_tabulated(std::move(r), std::move(u));
  }

  PotentialKind kind() const { return kind_; }
  double range_cutoff() const { return cutoff_; }

  // SphericalWell accessors
  double well_depth() const { return p1_; }
  double well_radius() const { return p2_; }
  // Bargmann accessors
  double bargmann_beta() const { return p1_; }
  double bargmann_alpha() const { return p2_; }

  double value(double r) const { return eval(r, SampleMode::Contract); }

  double eval(double r, SampleMode mode) const {
    if (r < 0.0) throw domain_error("potential evaluated at negative radius");
    switch (kind_) {
      case PotentialKind::SphericalWell: {
        const double U0 = p1_, a = p2_;
        if (mode == SampleMode::InteriorExtension) return -U0;
        if (mode == SampleMode::Integration && r == a) return -0.5 * U0;
        return r < a ? -U0 : 0.0;
      }
      case PotentialKind::Bargmann: {
        if (r > cutoff_ && mode != SampleMode::InteriorExtension) return 0.0;
        const double beta = p1_, q = p2_ / p1_;
        const double d = std::cosh(beta * r) - q * std::sinh(beta * r);
        return -2.0 * (p1_ * p1_ - p2_ * p2_) / (d * d);
      }
      case PotentialKind::Tabulated: {
        if (r > cutoff_) return 0.0;
        if (r <= tab_r_.front()) return tab_u_.front();
        auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
        const std::size_t i = static_cast<std::size_t>(it - tab_r_.begin());
        const double t = (r - tab_r_[i - 1]) / (tab_r_[i] - tab_r_[i - 1]);
        return tab_u_[i - 1] + t * (tab_u_[i] - tab_u_[i - 1]);
      }
      case PotentialKind::Composite: {
        // only the range-setting parts continue past the matching radius;
        // shorter-ranged parts are already identically zero there
        double sum = 0.0;
        for (const auto& [w, p] : parts_) {
          const bool sets_range = p.cutoff_ >= cutoff_ * (1.0 - 1e-12);
          const SampleMode part_mode =
              (mode == SampleMode::InteriorExtension && !sets_range)
                  ? SampleMode::Contract
                  : mode;
          sum += w * p.eval(r, part_mode);
        }
        return sum;
      }
    }
    throw unsupported_error("unknown potential kind");
  }

  std::vector<double> samples(const RadialGrid& grid, SampleMode mode) const {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = eval(grid.r(i), mode);
    return out;
  }

private:
  PotentialModel() = default;

  PotentialKind kind_ = PotentialKind::SphericalWell;
  double p1_ = 0.0, p2_ = 0.0;
  double cutoff_ = 0.0;
  std::vector<double> tab_r_, tab_u_;
  std::vector<std::pair<double, PotentialModel>> parts_;
};

/// One-term separable (non-local) kernel
///   V(r,r') = -lambda (e^{-beta r}/r)(e^{-beta r'}/r'),
/// with lambda fixed so the solitary bound level sits at E = -alpha_b^2.
/// Reduced to u = r psi the equation of motion reads
///   u'' - alpha^2 u = -lambda e^{-beta r} Integral e^{-beta r'} u(r') dr'.
class SeparableModel {
public:
  SeparableModel(double beta, double alpha_b) : beta_(beta), alpha_b_(alpha_b) {
    if (!(beta > alpha_b && alpha_b > 0.0))
      throw domain_error("yamaguchi: requires beta > alpha_b > 0");
  }

  double beta() const { return beta_; }
  double alpha_b() const { return alpha_b_; }

  // Strength giving the bound level at -alpha_b^2; derived by inserting the
  // regular solution c (e^{-alpha r} - e^{-beta r}) into the equation of motion.
  double lambda() const { return 2.0 * beta_ * (beta_ + alpha_b_) * (beta_ + alpha_b_); }

  // Threshold strength: the alpha_b -> 0 limit of lambda(beta, alpha_b).
  static double lambda_critical(double beta) { return 2.0 * beta * beta * beta; }

  // Inverse of lambda(beta, .): the bound wavenumber supported by a strength.
  static double bound_alpha_from_lambda(double beta, double lambda) {
    if (!(lambda > lambda_critical(beta)))
      throw domain_error("yamaguchi: strength below the binding threshold");
    return std::sqrt(lambda / (2.0 * beta)) - beta;
  }

  double form_factor(double r) const { return std::exp(-beta_ * r); }

  // psi-space kernel value; finite only for r, r' > 0.
  double kernel(double r, double rp) const {
    if (!(r > 0.0 && rp > 0.0)) throw domain_error("yamaguchi kernel needs r, r' > 0");
    return -lambda() * std::exp(-beta_ * (r + rp)) / (r * rp);
  }

private:
  double beta_;
  double alpha_b_;
};

inline SeparableModel make_yamaguchi(double beta, double alpha_b) {
  return SeparableModel(beta, alpha_b);
}

inline double evaluate_local(const PotentialModel& m, double r) { return m.value(r); }

inline double evaluate_local(const SeparableModel&, double) {
  throw unsupported_error("separable kernel has no pointwise U(r)");
}

} // namespace wavepole
