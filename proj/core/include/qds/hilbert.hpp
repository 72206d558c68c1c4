#pragma once

// Truncated representations: Fock ladder algebra, Hermite-basis potentials,
// boundary compressions and the periodic-grid Laplacian.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qds/linops.hpp"

namespace qds {

/// First `size` Hermite functions; the last `buffer` indices are excluded from
/// certificate evaluation.
struct FockBasis {
  std::size_t size = 0;
  std::size_t buffer = 0;

  std::size_t interior() const { return size - buffer; }
  void validate() const;
};

enum class TruncationMode { exact, absorbing };

const char* to_string(TruncationMode mode);
TruncationMode truncation_mode_from_string(const std::string& s);

ComplexMatrix ladder(const FockBasis& basis);
ComplexMatrix number_op(const FockBasis& basis);
/// x = (a + a†)/√2.
ComplexMatrix position_op(const FockBasis& basis);
/// ∂ = (a − a†)/√2.
ComplexMatrix derivative_op(const FockBasis& basis);
/// −Δ = ∂†∂, exact compression (built one level up, then projected).
ComplexMatrix kinetic_op(const FockBasis& basis);

/// Diagonal 0/1 projector onto the interior indices.
ComplexMatrix interior_projector(const FockBasis& basis);
/// Top-left interior block of `a`.
ComplexMatrix interior_block(const ComplexMatrix& a, const FockBasis& basis);
/// True when every component of u beyond the interior vanishes.
bool is_interior(const ComplexVector& u, const FockBasis& basis);

struct QuadratureRule {
  RealVector nodes;
  RealVector weights;
};

/// Gauss–Hermite rule for ∫ f(x) dx (weights already carry the e^{x²}
/// factor), from Golub–Welsch.
QuadratureRule gauss_hermite(std::size_t order);
/// Gauss–Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(std::size_t order, double lo = -1.0, double hi = 1.0);

/// Values φ_k(x_i) of the orthonormal Hermite functions, rows indexed by point.
RealMatrix hermite_functions(const RealVector& x, std::size_t count);

struct PotentialQuadrature {
  /// 0 selects 2N + 8.
  std::size_t order = 0;
  /// Points where v is not smooth. When non-empty a graded composite
  /// Gauss–Legendre rule replaces Gauss–Hermite.
  std::vector<double> breakpoints;
};

/// ⟨h_m | v | h_n⟩ for m, n < N.
ComplexMatrix potential_op(const std::function<double(double)>& v, const FockBasis& basis,
                           const PotentialQuadrature& quad = {});

/// Ladder polynomial that can be materialized at any truncation size.
/// `bandwidth` bounds how far the operator raises the occupation number.
struct BandOperator {
  std::function<ComplexMatrix(std::size_t)> build;
  std::size_t bandwidth = 0;
};

struct CompressedChannels {
  std::vector<ComplexMatrix> jumps;
  ComplexMatrix loss;
};

/// Truncated jump operators Π L Π and loss term Π (Σ L†L) Π computed at size
/// N + bandwidth.
CompressedChannels compress_product(const std::vector<BandOperator>& ls, const FockBasis& basis,
                                    TruncationMode mode);

/// Periodic grid on [−R, R)^n.
struct GridBasis {
  std::size_t points = 0;
  double half_length = 0.0;
  int dim = 1;

  double spacing() const { return 2.0 * half_length / static_cast<double>(points); }
  std::size_t total() const;
  void validate() const;
};

/// Coordinates x_j = −R + j h along one axis.
RealVector grid_axis(const GridBasis& grid);
/// Symbol −|k|² in FFT order, flattened row-major for dim = 2.
RealVector laplacian_symbol(const GridBasis& grid);
/// Dense circulant matrix of f(symbol), for symbol = −|k|².
ComplexMatrix fourier_multiplier(const GridBasis& grid, const std::function<double(double)>& f);
ComplexMatrix fft_laplacian(const GridBasis& grid);
/// Δ^power applied to a grid function through forward/backward FFTs.
ComplexVector apply_laplacian(const GridBasis& grid, const ComplexVector& f, int power = 1);

}  // namespace qds
