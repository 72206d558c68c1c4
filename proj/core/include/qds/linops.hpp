#pragma once

// Dense complex linear algebra used by every other module.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qds {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTolerance = 1e-12;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
struct HermitianSpectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

bool is_square(const ComplexMatrix& a);
bool all_finite(const ComplexMatrix& a);

/// ‖A − A†‖_max ≤ rel_tol·(1 + ‖A‖_max).
bool is_hermitian(const ComplexMatrix& a, double rel_tol = kHermitianTolerance);

ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// Largest absolute entry.
double max_abs(const ComplexMatrix& a);

/// Spectral norm (largest singular value).
double operator_norm(const ComplexMatrix& a);

/// Throws ContractViolation unless `a` is square and Hermitian.
void require_hermitian(const ComplexMatrix& a, const char* what);

HermitianSpectrum hermitian_eig(const ComplexMatrix& a);

double min_eig(const ComplexMatrix& a);
double max_eig(const ComplexMatrix& a);

/// Default slack for operator inequality checks: 1e-8·‖A‖.
double default_slack(const ComplexMatrix& a);

/// Matrix exponential e^{tA} by scaling and squaring with the degree-13
/// diagonal Padé approximant.
ComplexMatrix expm(const ComplexMatrix& a, double t = 1.0);

/// Solver for λY − G†Y − YG = R.
///
/// The Schur factorization G = U T U† is computed once; each solve transforms
/// the right-hand side to the Schur basis and back-substitutes column by
/// column. Requires G + G† ⪯ 0 (so every shifted pair λ − conj(t_ii) − t_jj
/// has real part ≥ λ).
class SylvesterSolver {
 public:
  explicit SylvesterSolver(const ComplexMatrix& g);

  std::size_t dim() const { return static_cast<std::size_t>(t_.rows()); }

  ComplexMatrix solve(double lambda, const ComplexMatrix& rhs) const;

  /// Same equation with everything already expressed in the Schur basis.
  ComplexMatrix solve_in_schur_basis(double lambda, const ComplexMatrix& rhs) const;

  const ComplexMatrix& schur_vectors() const { return u_; }
  const ComplexMatrix& triangular() const { return t_; }

  ComplexMatrix to_schur_basis(const ComplexMatrix& x) const;
  ComplexMatrix from_schur_basis(const ComplexMatrix& x) const;

 private:
  ComplexMatrix u_;
  ComplexMatrix t_;
  bool identity_basis_ = false;
};

/// One-shot convenience wrapper around SylvesterSolver.
ComplexMatrix solve_sylvester(double lambda, const ComplexMatrix& g, const ComplexMatrix& rhs);

/// Bounded regularization C(I + εC)^{-1} of a PSD matrix.
ComplexMatrix regularize(const ComplexMatrix& c, double eps);

/// A^t for PSD A and t ∈ [0, 1], by spectral calculus.
ComplexMatrix frac_power(const ComplexMatrix& a, double t);

/// Applies f to the spectrum of a Hermitian matrix.
template <typename F>
ComplexMatrix spectral_apply(const HermitianSpectrum& s, F&& f) {
  RealVector mapped(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped[i] = f(s.eigenvalues[i]);
  return s.eigenvectors * mapped.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
}

}  // namespace qds
