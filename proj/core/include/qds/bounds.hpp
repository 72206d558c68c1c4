#pragma once

// Relative bounds ‖Wφ‖² ≤ ε‖Δφ‖² + aε^{−p}‖φ‖² for multiplication operators
// on a periodic grid.

#include <functional>
#include <string>
#include <vector>

#include "qds/hilbert.hpp"
#include "qds/linops.hpp"

namespace qds {

/// p = n / (4(1+α) − n). Throws HypothesisViolation unless n/(1+α) < 2.
double lemma41_exponent(int n, double alpha);

struct Lemma41Constants {
  int n = 1;
  double alpha = 0.0;
  double p = 0.0;
  double a = 0.0;
  /// ‖W^{1+α}‖₂² (grid Riemann sum).
  double w_norm_sq = 0.0;
  /// ∫_{ℝⁿ} (|λ|⁴ + 1)^{−(1+α)} dλ.
  double c_fourier = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  /// Scale r at ε = 1, and the largest momentum the grid represents.
  double r_min = 0.0;
  double k_max = 0.0;
};

/// Constant chain W^{2+2α} ≤ C₁rⁿ(r⁻⁴Δ² + 1)^{1+α}, C₂ = C₁^{1/(1+α)},
/// a = C₂^{1+p}. `w_samples` are grid values (row-major for n = 2).
Lemma41Constants lemma41_constants(const RealVector& w_samples, const GridBasis& grid, double alpha);

/// r(ε) = (ε/C₂)^{−1/(4 − n/(1+α))}.
double lemma41_scale(const Lemma41Constants& k, double eps);

struct RelativeBoundCertificate {
  int n = 1;
  double alpha = 0.0;
  double p = 0.0;
  double a = 0.0;
  std::vector<double> eps_grid;
  /// min_eig(εΔ² + aε^{−p} − W²) per ε; non-negative means satisfied.
  std::vector<double> margins;
  double slack = 0.0;
  GridBasis grid;
  bool pass = false;
};

RelativeBoundCertificate verify_relative_bound(const RealVector& w_samples, const GridBasis& grid,
                                               const std::vector<double>& eps_grid, double a, double p);

/// Smallest b with W² ≤ b(−Δ + 1) on the grid: max_eig(S W² S), S = (−Δ + 1)^{−1/2}.
double form_bound_constant(const RealVector& w_samples, const GridBasis& grid);

/// Samples of f on the grid (row-major (x, y) for dim = 2).
RealVector sample_on_grid(const GridBasis& grid, const std::function<double(const RealVector&)>& f);

}  // namespace qds
