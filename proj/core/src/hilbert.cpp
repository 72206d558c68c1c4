#include "qds/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "qds/errors.hpp"

namespace qds {

void FockBasis::validate() const {
  if (size < 2) throw InputError("FockBasis: size must be at least 2");
  if (buffer >= size) throw InputError("FockBasis: buffer must be smaller than size");
}

const char* to_string(TruncationMode mode) {
  return mode == TruncationMode::exact ? "exact" : "absorbing";
}

TruncationMode truncation_mode_from_string(const std::string& s) {
  if (s == "exact") return TruncationMode::exact;
  if (s == "absorbing") return TruncationMode::absorbing;
  throw InputError("unknown truncation mode '" + s + "'");
}

ComplexMatrix ladder(const FockBasis& basis) {
  basis.validate();
  const auto n = static_cast<Eigen::Index>(basis.size);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

ComplexMatrix number_op(const FockBasis& basis) {
  basis.validate();
  const auto n = static_cast<Eigen::Index>(basis.size);
  RealVector d = RealVector::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  return d.cast<Complex>().asDiagonal();
}

ComplexMatrix position_op(const FockBasis& basis) {
  const ComplexMatrix a = ladder(basis);
  return (a + a.adjoint()) / std::numbers::sqrt2;
}

ComplexMatrix derivative_op(const FockBasis& basis) {
  const ComplexMatrix a = ladder(basis);
  return (a - a.adjoint()) / std::numbers::sqrt2;
}

ComplexMatrix kinetic_op(const FockBasis& basis) {
  basis.validate();
  const auto n = static_cast<Eigen::Index>(basis.size);
  const ComplexMatrix d = derivative_op({basis.size + 1, 0});
  return (d.adjoint() * d).topLeftCorner(n, n);
}

ComplexMatrix interior_projector(const FockBasis& basis) {
  basis.validate();
  const auto n = static_cast<Eigen::Index>(basis.size);
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(basis.interior()); ++k) p(k, k) = 1.0;
  return p;
}

ComplexMatrix interior_block(const ComplexMatrix& a, const FockBasis& basis) {
  basis.validate();
  if (a.rows() != static_cast<Eigen::Index>(basis.size) || a.cols() != a.rows())
    throw InputError("interior_block: dimension mismatch");
  const auto k = static_cast<Eigen::Index>(basis.interior());
  return a.topLeftCorner(k, k);
}

bool is_interior(const ComplexVector& u, const FockBasis& basis) {
  if (u.size() != static_cast<Eigen::Index>(basis.size)) return false;
  if (basis.buffer == 0) return true;
  return u.tail(static_cast<Eigen::Index>(basis.buffer)).cwiseAbs().maxCoeff() == 0.0;
}

namespace {

Eigen::SelfAdjointEigenSolver<RealMatrix> jacobi_eigen(const RealVector& diag, const RealVector& sub) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericError("quadrature: Jacobi eigensolver did not converge");
  return es;
}

}  // namespace

RealMatrix hermite_functions(const RealVector& x, std::size_t count) {
  const Eigen::Index np = x.size();
  const auto nk = static_cast<Eigen::Index>(count);
  RealMatrix phi(np, nk);
  if (nk == 0) return phi;
  const double c0 = std::pow(std::numbers::pi, -0.25);
  for (Eigen::Index i = 0; i < np; ++i) {
    const double xi = x[i];
    double prev = 0.0;
    double cur = c0 * std::exp(-0.5 * xi * xi);
    phi(i, 0) = cur;
    for (Eigen::Index k = 0; k + 1 < nk; ++k) {
      const double kd = static_cast<double>(k);
      const double next = std::sqrt(2.0 / (kd + 1.0)) * xi * cur - std::sqrt(kd / (kd + 1.0)) * prev;
      prev = cur;
      cur = next;
      phi(i, k + 1) = cur;
    }
  }
  return phi;
}

QuadratureRule gauss_hermite(std::size_t order) {
  if (order < 1) throw InputError("gauss_hermite: order must be positive");
  const auto q = static_cast<Eigen::Index>(order);
  RealVector sub(std::max<Eigen::Index>(q - 1, 0));
  for (Eigen::Index k = 1; k < q; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k) / 2.0);
  auto es = jacobi_eigen(RealVector::Zero(q), sub);
  QuadratureRule rule{es.eigenvalues(), RealVector(q)};
  const RealMatrix phi = hermite_functions(rule.nodes, order);
  for (Eigen::Index i = 0; i < q; ++i) rule.weights[i] = 1.0 / phi.row(i).squaredNorm();
  return rule;
}

QuadratureRule gauss_legendre(std::size_t order, double lo, double hi) {
  if (order < 1) throw InputError("gauss_legendre: order must be positive");
  if (!(hi > lo)) throw InputError("gauss_legendre: empty interval");
  const auto q = static_cast<Eigen::Index>(order);
  RealVector sub(std::max<Eigen::Index>(q - 1, 0));
  for (Eigen::Index k = 1; k < q; ++k) {
    const double kd = static_cast<double>(k);
    sub[k - 1] = kd / std::sqrt(4.0 * kd * kd - 1.0);
  }
  auto es = jacobi_eigen(RealVector::Zero(q), sub);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  QuadratureRule rule{RealVector(q), RealVector(q)};
  for (Eigen::Index i = 0; i < q; ++i) {
    rule.nodes[i] = mid + half * es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

namespace {

QuadratureRule graded_rule(std::size_t n, const std::vector<double>& breakpoints) {
  const double reach = std::sqrt(2.0 * static_cast<double>(n) + 1.0) + 12.0;
  std::vector<double> edges{-reach, reach};
  for (double x = -reach + 0.5; x < reach; x += 0.5) edges.push_back(x);
  for (double b : breakpoints) {
    if (!std::isfinite(b)) throw InputError("potential_op: non-finite breakpoint");
    if (b <= -reach || b >= reach) continue;
    edges.push_back(b);
    double d = 0.5;
    for (int k = 0; k < 16; ++k, d *= 0.15) {
      if (b - d > -reach) edges.push_back(b - d);
      if (b + d < reach) edges.push_back(b + d);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              edges.end());

  constexpr std::size_t panel_order = 20;
  const QuadratureRule ref = gauss_legendre(panel_order);
  const auto panels = static_cast<Eigen::Index>(edges.size() - 1);
  QuadratureRule rule{RealVector(panels * ref.nodes.size()), RealVector(panels * ref.nodes.size())};
  Eigen::Index at = 0;
  for (Eigen::Index p = 0; p < panels; ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    for (Eigen::Index i = 0; i < ref.nodes.size(); ++i, ++at) {
      rule.nodes[at] = 0.5 * (hi + lo) + 0.5 * (hi - lo) * ref.nodes[i];
      rule.weights[at] = 0.5 * (hi - lo) * ref.weights[i];
    }
  }
  return rule;
}

}  // namespace

ComplexMatrix potential_op(const std::function<double(double)>& v, const FockBasis& basis,
                           const PotentialQuadrature& quad) {
  basis.validate();
  const QuadratureRule rule =
      quad.breakpoints.empty()
          ? gauss_hermite(quad.order == 0 ? 2 * basis.size + 8 : quad.order)
          : graded_rule(basis.size, quad.breakpoints);
  const RealMatrix phi = hermite_functions(rule.nodes, basis.size);
  RealVector wv(rule.nodes.size());
  for (Eigen::Index i = 0; i < wv.size(); ++i) {
    const double value = v(rule.nodes[i]);
    if (!std::isfinite(value)) throw InputError("potential_op: potential is not finite at a quadrature node");
    wv[i] = rule.weights[i] * value;
  }
  RealMatrix m = phi.transpose() * wv.asDiagonal() * phi;
  m = 0.5 * (m + m.transpose()).eval();
  return m.cast<Complex>();
}

CompressedChannels compress_product(const std::vector<BandOperator>& ls, const FockBasis& basis,
                                    TruncationMode mode) {
  (void)mode;  // both modes share the compression; assemble() interprets the mode
  basis.validate();
  const auto n = static_cast<Eigen::Index>(basis.size);
  CompressedChannels out{{}, ComplexMatrix::Zero(n, n)};
  for (const BandOperator& op : ls) {
    if (!op.build) throw InputError("compress_product: operator has no builder");
    const std::size_t ext = basis.size + op.bandwidth;
    const ComplexMatrix big = op.build(ext);
    if (big.rows() != static_cast<Eigen::Index>(ext) || big.cols() != big.rows())
      throw InputError("compress_product: builder returned wrong dimension");

    const ComplexMatrix probe = op.build(ext + 1);
    const double scale = 1e-14 * (1.0 + max_abs(probe));
    if (max_abs(probe.bottomLeftCorner(probe.rows() - static_cast<Eigen::Index>(ext), n)) > scale)
      throw InputError("compress_product: operator band width exceeds the declared extension");

    out.loss += (big.adjoint() * big).topLeftCorner(n, n);
    out.jumps.push_back(big.topLeftCorner(n, n));
  }
  out.loss = hermitian_part(out.loss);
  return out;
}

std::size_t GridBasis::total() const { return dim == 1 ? points : points * points; }

void GridBasis::validate() const {
  if (points < 2 || (points & (points - 1)) != 0) throw InputError("GridBasis: points must be a power of two");
  if (!(half_length > 0.0) || !std::isfinite(half_length)) throw InputError("GridBasis: half length must be positive");
  if (dim != 1 && dim != 2) throw InputError("GridBasis: dimension must be 1 or 2");
}

RealVector grid_axis(const GridBasis& grid) {
  grid.validate();
  const auto n = static_cast<Eigen::Index>(grid.points);
  RealVector x(n);
  for (Eigen::Index j = 0; j < n; ++j) x[j] = -grid.half_length + static_cast<double>(j) * grid.spacing();
  return x;
}

namespace {

RealVector axis_momenta(const GridBasis& grid) {
  const auto n = static_cast<Eigen::Index>(grid.points);
  RealVector k(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Index signed_m = m < n / 2 ? m : m - n;
    k[m] = std::numbers::pi * static_cast<double>(signed_m) / grid.half_length;
  }
  return k;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place transform of a flattened grid function.
void fft(const GridBasis& grid, ComplexVector& data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  const int n = static_cast<int>(grid.points);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = grid.dim == 1 ? fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE)
                         : fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

RealVector laplacian_symbol(const GridBasis& grid) {
  grid.validate();
  const RealVector k = axis_momenta(grid);
  if (grid.dim == 1) return -k.array().square();
  const auto n = k.size();
  RealVector s(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s[i * n + j] = -(k[i] * k[i] + k[j] * k[j]);
  return s;
}

ComplexMatrix fourier_multiplier(const GridBasis& grid, const std::function<double(double)>& f) {
  const RealVector symbol = laplacian_symbol(grid);
  const auto total = static_cast<Eigen::Index>(grid.total());
  ComplexVector column(total);
  for (Eigen::Index m = 0; m < total; ++m) column[m] = f(symbol[m]);
  fft(grid, column, FFTW_BACKWARD);
  column /= static_cast<double>(total);

  ComplexMatrix out(total, total);
  const auto n = static_cast<Eigen::Index>(grid.points);
  if (grid.dim == 1) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) out(i, j) = column[(i - j + n) % n];
  } else {
    for (Eigen::Index j = 0; j < total; ++j)
      for (Eigen::Index i = 0; i < total; ++i) {
        const Eigen::Index d0 = (i / n - j / n + n) % n;
        const Eigen::Index d1 = (i % n - j % n + n) % n;
        out(i, j) = column[d0 * n + d1];
      }
  }
  return hermitian_part(out);
}

ComplexMatrix fft_laplacian(const GridBasis& grid) {
  return fourier_multiplier(grid, [](double s) { return s; });
}

ComplexVector apply_laplacian(const GridBasis& grid, const ComplexVector& f, int power) {
  grid.validate();
  if (f.size() != static_cast<Eigen::Index>(grid.total())) throw InputError("apply_laplacian: dimension mismatch");
  if (power < 0) throw InputError("apply_laplacian: power must be non-negative");
  const RealVector symbol = laplacian_symbol(grid);
  ComplexVector data = f;
  fft(grid, data, FFTW_FORWARD);
  for (Eigen::Index m = 0; m < data.size(); ++m) data[m] *= std::pow(symbol[m], power);
  fft(grid, data, FFTW_BACKWARD);
  return data / static_cast<double>(data.size());
}

}  // namespace qds
