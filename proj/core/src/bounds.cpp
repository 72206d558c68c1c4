#include "qds/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qds/errors.hpp"

namespace qds {

double lemma41_exponent(int n, double alpha) {
  if (n < 1) throw InputError("lemma41_exponent: dimension must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("lemma41_exponent: alpha must be non-negative");
  const double nd = static_cast<double>(n);
  if (!(nd / (1.0 + alpha) < 2.0)) throw HypothesisViolation("lemma41_exponent: requires n/(1+alpha) < 2");
  return nd / (4.0 * (1.0 + alpha) - nd);
}

namespace {

double fourier_constant(int n, double alpha) {
  using boost::math::quadrature::gauss_kronrod;
  const double e = -(1.0 + alpha);
  const double inf = std::numeric_limits<double>::infinity();
  double err = 0.0;
  if (n == 1) {
    auto f = [e](double t) { return std::pow(t * t * t * t + 1.0, e); };
    return 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, inf, 15, 1e-13, &err);
  }
  if (n == 2) {
    auto f = [e](double t) { return t * std::pow(t * t * t * t + 1.0, e); };
    return 2.0 * std::numbers::pi * gauss_kronrod<double, 61>::integrate(f, 0.0, inf, 15, 1e-13, &err);
  }
  throw InputError("lemma41_constants: grids support n = 1 or 2");
}

}  // namespace

Lemma41Constants lemma41_constants(const RealVector& w_samples, const GridBasis& grid, double alpha) {
  grid.validate();
  if (w_samples.size() != static_cast<Eigen::Index>(grid.total()))
    throw InputError("lemma41_constants: sample count does not match the grid");
  Lemma41Constants k;
  k.n = grid.dim;
  k.alpha = alpha;
  k.p = lemma41_exponent(grid.dim, alpha);

  const double cell = std::pow(grid.spacing(), grid.dim);
  double norm_sq = 0.0;
  for (Eigen::Index i = 0; i < w_samples.size(); ++i) norm_sq += std::pow(std::abs(w_samples[i]), 2.0 * (1.0 + alpha));
  norm_sq *= cell;
  if (!std::isfinite(norm_sq)) throw HypothesisViolation("lemma41_constants: W^{1+alpha} is not square integrable on the grid");
  k.w_norm_sq = norm_sq;

  const double nd = static_cast<double>(grid.dim);
  k.c_fourier = fourier_constant(grid.dim, alpha);
  k.c1 = norm_sq * std::pow(2.0 * std::numbers::pi, -nd) * k.c_fourier;
  k.c2 = std::pow(k.c1, 1.0 / (1.0 + alpha));
  k.a = std::pow(k.c2, 1.0 + k.p);
  k.r_min = k.c2 > 0.0 ? lemma41_scale(k, 1.0) : 0.0;
  k.k_max = std::numbers::pi / grid.spacing();
  return k;
}

double lemma41_scale(const Lemma41Constants& k, double eps) {
  if (!(eps > 0.0)) throw InputError("lemma41_scale: eps must be positive");
  if (!(k.c2 > 0.0)) throw InputError("lemma41_scale: C2 vanishes, every scale works");
  const double s = static_cast<double>(k.n) / (1.0 + k.alpha);
  return std::pow(eps / k.c2, -1.0 / (4.0 - s));
}

RealVector sample_on_grid(const GridBasis& grid, const std::function<double(const RealVector&)>& f) {
  const RealVector axis = grid_axis(grid);
  const auto n = axis.size();
  if (grid.dim == 1) {
    RealVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = f(RealVector::Constant(1, axis[i]));
    return out;
  }
  RealVector out(n * n);
  RealVector x(2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      x << axis[i], axis[j];
      out[i * n + j] = f(x);
    }
  return out;
}

RelativeBoundCertificate verify_relative_bound(const RealVector& w_samples, const GridBasis& grid,
                                               const std::vector<double>& eps_grid, double a, double p) {
  grid.validate();
  if (w_samples.size() != static_cast<Eigen::Index>(grid.total()))
    throw InputError("verify_relative_bound: sample count does not match the grid");
  if (eps_grid.empty()) throw InputError("verify_relative_bound: empty ε grid");
  RelativeBoundCertificate cert;
  cert.n = grid.dim;
  cert.p = p;
  cert.a = a;
  cert.eps_grid = eps_grid;
  cert.grid = grid;

  const RealMatrix bilaplacian = fourier_multiplier(grid, [](double s) { return s * s; }).real();
  const RealVector w2 = w_samples.array().square();
  const double symbol_max = laplacian_symbol(grid).array().square().maxCoeff();
  cert.pass = true;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw InputError("verify_relative_bound: ε must be positive");
    const double shift = a * std::pow(eps, -p);
    RealMatrix d = eps * bilaplacian;
    d.diagonal().array() += shift - w2.array();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(d, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("verify_relative_bound: eigensolver did not converge");
    const double margin = es.eigenvalues().minCoeff();
    const double tau = 1e-8 * (1.0 + eps * symbol_max + shift + w2.maxCoeff());
    cert.slack = std::max(cert.slack, tau);
    cert.margins.push_back(margin);
    if (margin < -tau) cert.pass = false;
  }
  return cert;
}

double form_bound_constant(const RealVector& w_samples, const GridBasis& grid) {
  grid.validate();
  if (w_samples.size() != static_cast<Eigen::Index>(grid.total()))
    throw InputError("form_bound_constant: sample count does not match the grid");
  const RealMatrix s = fourier_multiplier(grid, [](double sym) { return 1.0 / std::sqrt(1.0 - sym); }).real();
  const RealMatrix b = s * w_samples.array().square().matrix().asDiagonal() * s;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (b + b.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace qds
