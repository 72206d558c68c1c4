#include "qds/linops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qds/errors.hpp"

namespace qds {

bool is_square(const ComplexMatrix& a) { return a.rows() == a.cols() && a.rows() >= 1; }

bool all_finite(const ComplexMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (!is_square(a)) return false;
  return max_abs(a - a.adjoint()) <= rel_tol * (1.0 + max_abs(a));
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

double operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

void require_hermitian(const ComplexMatrix& a, const char* what) {
  if (!is_square(a)) throw ContractViolation(std::string(what) + ": matrix is not square");
  if (!is_hermitian(a)) throw ContractViolation(std::string(what) + ": matrix is not Hermitian");
}

HermitianSpectrum hermitian_eig(const ComplexMatrix& a) {
  require_hermitian(a, "hermitian_eig");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a));
  if (es.info() != Eigen::Success) throw NumericError("hermitian_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

RealVector hermitian_eigenvalues(const ComplexMatrix& a, const char* what) {
  require_hermitian(a, what);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError(std::string(what) + ": eigensolver did not converge");
  return es.eigenvalues();
}

double one_norm(const ComplexMatrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

double min_eig(const ComplexMatrix& a) { return hermitian_eigenvalues(a, "min_eig").minCoeff(); }

double max_eig(const ComplexMatrix& a) { return hermitian_eigenvalues(a, "max_eig").maxCoeff(); }

double default_slack(const ComplexMatrix& a) { return 1e-8 * operator_norm(a); }

ComplexMatrix expm(const ComplexMatrix& a, double t) {
  if (!is_square(a)) throw InputError("expm: matrix is not square");
  if (!std::isfinite(t) || t < 0.0) throw InputError("expm: time must be finite and non-negative");
  if (!all_finite(a)) throw InputError("expm: non-finite entries");

  const Eigen::Index n = a.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ComplexMatrix x = t * a;
  const double norm = one_norm(x);
  if (norm == 0.0) return id;

  // Higham (2005), degree 13.
  constexpr double theta13 = 5.371920351148152;
  constexpr std::array<double, 14> b = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                        1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                        670442572800.0,      33522128640.0,       1323241920.0,
                                        40840800.0,          960960.0,            16380.0,
                                        182.0,               1.0};
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    x /= std::ldexp(1.0, squarings);
  }

  const ComplexMatrix x2 = x * x;
  const ComplexMatrix x4 = x2 * x2;
  const ComplexMatrix x6 = x4 * x2;
  const ComplexMatrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 +
                                b[3] * x2 + b[1] * id;
  const ComplexMatrix u = x * u_inner;
  const ComplexMatrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 +
                          b[2] * x2 + b[0] * id;

  ComplexMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;

  if (!all_finite(r)) throw NumericError("expm: overflow during scaling and squaring");
  return r;
}

SylvesterSolver::SylvesterSolver(const ComplexMatrix& g) {
  if (!is_square(g)) throw InputError("SylvesterSolver: generator is not square");
  if (!all_finite(g)) throw InputError("SylvesterSolver: non-finite entries");
  const double tol = 1e-10 * (1.0 + max_abs(g));
  if (max_eig(hermitian_part(g + g.adjoint())) > tol)
    throw InputError("SylvesterSolver: G + G† is not negative semidefinite");

  const Eigen::Index n = g.rows();
  const ComplexMatrix off = g - ComplexMatrix(g.diagonal().asDiagonal());
  if (max_abs(off) == 0.0) {
    identity_basis_ = true;
    u_ = ComplexMatrix::Identity(n, n);
    t_ = g;
    return;
  }
  Eigen::ComplexSchur<ComplexMatrix> schur(g);
  if (schur.info() != Eigen::Success) throw NumericError("SylvesterSolver: Schur decomposition failed");
  u_ = schur.matrixU();
  t_ = schur.matrixT().triangularView<Eigen::Upper>();
}

ComplexMatrix SylvesterSolver::to_schur_basis(const ComplexMatrix& x) const {
  if (identity_basis_) return x;
  return u_.adjoint() * x * u_;
}

ComplexMatrix SylvesterSolver::from_schur_basis(const ComplexMatrix& x) const {
  if (identity_basis_) return x;
  return u_ * x * u_.adjoint();
}

ComplexMatrix SylvesterSolver::solve_in_schur_basis(double lambda, const ComplexMatrix& rhs) const {
  const Eigen::Index n = t_.rows();
  if (rhs.rows() != n || rhs.cols() != n) throw InputError("SylvesterSolver: dimension mismatch");
  if (!(lambda > 0.0)) throw InputError("SylvesterSolver: lambda must be positive");

  ComplexMatrix y(n, n);
  ComplexVector col(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    col = rhs.col(j);
    if (j > 0) col.noalias() += y.leftCols(j) * t_.col(j).head(j);
    const Complex tjj = t_(j, j);
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex acc = col[i];
      if (i > 0) acc += t_.col(i).head(i).dot(y.col(j).head(i));
      const Complex den = lambda - std::conj(t_(i, i)) - tjj;
      if (std::abs(den) < 1e-12)
        throw ConditioningError("solve_sylvester: shifted spectrum is numerically singular");
      y(i, j) = acc / den;
    }
  }
  return y;
}

ComplexMatrix SylvesterSolver::solve(double lambda, const ComplexMatrix& rhs) const {
  return from_schur_basis(solve_in_schur_basis(lambda, to_schur_basis(rhs)));
}

ComplexMatrix solve_sylvester(double lambda, const ComplexMatrix& g, const ComplexMatrix& rhs) {
  return SylvesterSolver(g).solve(lambda, rhs);
}

namespace {

HermitianSpectrum psd_spectrum(const ComplexMatrix& a, const char* what) {
  HermitianSpectrum s = hermitian_eig(a);
  const double floor = -1e-12 * std::max(1.0, s.eigenvalues.cwiseAbs().maxCoeff());
  if (s.eigenvalues.minCoeff() < floor)
    throw InputError(std::string(what) + ": matrix is not positive semidefinite");
  return s;
}

}  // namespace

ComplexMatrix regularize(const ComplexMatrix& c, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InputError("regularize: eps must be non-negative");
  const HermitianSpectrum s = psd_spectrum(c, "regularize");
  return spectral_apply(s, [eps](double x) {
    x = std::max(x, 0.0);
    return x / (1.0 + eps * x);
  });
}

ComplexMatrix frac_power(const ComplexMatrix& a, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("frac_power: exponent must lie in [0, 1]");
  const HermitianSpectrum s = psd_spectrum(a, "frac_power");
  return spectral_apply(s, [t](double x) { return std::pow(std::max(x, 0.0), t); });
}

}  // namespace qds
