#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "qds/hilbert.hpp"
#include "qds/linops.hpp"

namespace qds {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Validated Lindblad data (H, {L_l}, M, G = −iH − ½M) at a fixed truncation.
/// Immutable once assembled.
class LindbladModel {
 public:
  std::size_t dim() const { return static_cast<std::size_t>(h_.rows()); }
  const ComplexMatrix& hamiltonian() const { return h_; }
  const std::vector<ComplexMatrix>& jumps() const { return ls_; }
  const ComplexMatrix& loss() const { return m_; }
  const ComplexMatrix& g() const { return g_; }
  TruncationMode mode() const { return mode_; }
  const FockBasis& basis() const { return basis_; }

  /// Sparse copies are kept when the operators are banded enough to pay off.
  bool sparse() const { return sparse_; }
  const SparseMatrix& g_sparse() const { return gs_; }
  const SparseMatrix& g_adjoint_sparse() const { return gs_adj_; }
  const std::vector<SparseMatrix>& jumps_sparse() const { return ls_sparse_; }
  const std::vector<SparseMatrix>& jumps_adjoint_sparse() const { return ls_adj_sparse_; }

 private:
  friend LindbladModel assemble(const ComplexMatrix&, std::vector<ComplexMatrix>, const FockBasis&,
                                TruncationMode, std::optional<ComplexMatrix>);
  LindbladModel() = default;

  ComplexMatrix h_;
  std::vector<ComplexMatrix> ls_;
  ComplexMatrix m_;
  ComplexMatrix g_;
  TruncationMode mode_ = TruncationMode::exact;
  FockBasis basis_;

  bool sparse_ = false;
  SparseMatrix gs_;
  SparseMatrix gs_adj_;
  std::vector<SparseMatrix> ls_sparse_;
  std::vector<SparseMatrix> ls_adj_sparse_;
};

/// Builds the model. When `loss` is omitted, M = Σ L†L at the given size.
///
/// exact:     ‖G + G† + Σ L†L‖ ≤ 1e-11·(1 + ‖M‖) is enforced.
/// absorbing: G + G† + Σ L†L ⪯ 1e-11·(1 + ‖M‖) is enforced.
LindbladModel assemble(const ComplexMatrix& h, std::vector<ComplexMatrix> ls, const FockBasis& basis,
                       TruncationMode mode, std::optional<ComplexMatrix> loss = std::nullopt);

/// ‖G + G† + Σ L†L‖ (operator norm).
double assumption_a_residual(const LindbladModel& model);

/// Φ(X) = Σ L†XL.
ComplexMatrix jump_map(const LindbladModel& model, const ComplexMatrix& x);

/// Heisenberg generator XG + G†X + Σ L†XL.
ComplexMatrix lindblad_apply(const LindbladModel& model, const ComplexMatrix& x);

/// Pre-adjoint Gρ + ρG† + Σ LρL†, assembled from the same data independently.
ComplexMatrix lindblad_adjoint_apply(const LindbladModel& model, const ComplexMatrix& rho);

enum class Picture { heisenberg, schrodinger };

/// Column-major vectorized generator, dim ≤ 24 only.
ComplexMatrix superoperator(const LindbladModel& model, Picture picture = Picture::heisenberg);

/// Choi matrix Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|) of a map given in column-major vec form.
ComplexMatrix choi_matrix(const ComplexMatrix& superop, std::size_t dim);

/// FNV-1a over the model data, as 16 hex digits.
std::string model_fingerprint(const LindbladModel& model);

}  // namespace qds
