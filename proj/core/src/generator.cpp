#include "qds/generator.hpp"

#include <cstdio>
#include <cstring>

#include <unsupported/Eigen/KroneckerProduct>

#include "qds/errors.hpp"

namespace qds {

namespace {

constexpr Complex kI{0.0, 1.0};

SparseMatrix to_sparse(const ComplexMatrix& a) {
  SparseMatrix s = a.sparseView(max_abs(a), 1e-14);
  s.makeCompressed();
  return s;
}

}  // namespace

LindbladModel assemble(const ComplexMatrix& h, std::vector<ComplexMatrix> ls, const FockBasis& basis,
                       TruncationMode mode, std::optional<ComplexMatrix> loss) {
  if (!is_square(h)) throw InputError("assemble: H is not square");
  require_hermitian(h, "assemble: H");
  const Eigen::Index n = h.rows();
  if (static_cast<std::size_t>(n) != basis.size) throw InputError("assemble: H does not match the basis size");
  basis.validate();
  for (const auto& l : ls)
    if (l.rows() != n || l.cols() != n) throw InputError("assemble: jump operator dimension mismatch");
  if (!all_finite(h)) throw InputError("assemble: H has non-finite entries");

  ComplexMatrix gain = ComplexMatrix::Zero(n, n);
  for (const auto& l : ls) gain += l.adjoint() * l;

  ComplexMatrix m = loss ? *loss : gain;
  if (m.rows() != n || m.cols() != n) throw InputError("assemble: M dimension mismatch");
  require_hermitian(m, "assemble: M");
  m = hermitian_part(m);

  LindbladModel model;
  model.h_ = hermitian_part(h);
  model.ls_ = std::move(ls);
  model.m_ = m;
  model.g_ = -kI * model.h_ - 0.5 * m;
  model.mode_ = mode;
  model.basis_ = basis;

  const double scale = 1e-11 * (1.0 + operator_norm(m));
  const ComplexMatrix balance = hermitian_part(model.g_ + model.g_.adjoint() + gain);
  if (mode == TruncationMode::exact) {
    const double residual = operator_norm(balance);
    if (residual > scale) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "assemble: exact mode requires G + G† + ΣL†L = 0 (residual %.3g); use absorbing mode", residual);
      throw InputError(msg);
    }
  } else if (max_eig(balance) > scale) {
    throw InputError("assemble: retained gain exceeds dissipation (G + G† + ΣL†L not ⪯ 0)");
  }
  if (max_eig(hermitian_part(model.g_ + model.g_.adjoint())) > scale)
    throw InputError("assemble: G + G† is not negative semidefinite");

  model.gs_ = to_sparse(model.g_);
  std::size_t nnz = model.gs_.nonZeros();
  for (const auto& l : model.ls_) {
    model.ls_sparse_.push_back(to_sparse(l));
    nnz += model.ls_sparse_.back().nonZeros();
  }
  const double dense_size = static_cast<double>(n) * static_cast<double>(n) * (1.0 + model.ls_.size());
  model.sparse_ = n >= 16 && static_cast<double>(nnz) <= 0.25 * dense_size;
  if (model.sparse_) {
    model.gs_adj_ = model.gs_.adjoint();
    for (const auto& l : model.ls_sparse_) model.ls_adj_sparse_.push_back(l.adjoint());
  } else {
    model.gs_ = SparseMatrix();
    model.ls_sparse_.clear();
  }
  return model;
}

double assumption_a_residual(const LindbladModel& model) {
  ComplexMatrix r = model.g() + model.g().adjoint();
  for (const auto& l : model.jumps()) r += l.adjoint() * l;
  return operator_norm(r);
}

namespace {

void require_dim(const LindbladModel& model, const ComplexMatrix& x, const char* what) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  if (x.rows() != n || x.cols() != n) throw InputError(std::string(what) + ": dimension mismatch");
}

}  // namespace

ComplexMatrix jump_map(const LindbladModel& model, const ComplexMatrix& x) {
  require_dim(model, x, "jump_map");
  const auto n = static_cast<Eigen::Index>(model.dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  if (model.sparse()) {
    for (std::size_t k = 0; k < model.jumps().size(); ++k) {
      const ComplexMatrix xl = x * model.jumps_sparse()[k];
      out.noalias() += model.jumps_adjoint_sparse()[k] * xl;
    }
  } else {
    for (const auto& l : model.jumps()) out.noalias() += l.adjoint() * (x * l);
  }
  return out;
}

ComplexMatrix lindblad_apply(const LindbladModel& model, const ComplexMatrix& x) {
  ComplexMatrix out = jump_map(model, x);
  if (model.sparse()) {
    out.noalias() += x * model.g_sparse();
    out.noalias() += model.g_adjoint_sparse() * x;
  } else {
    out.noalias() += x * model.g();
    out.noalias() += model.g().adjoint() * x;
  }
  return out;
}

ComplexMatrix lindblad_adjoint_apply(const LindbladModel& model, const ComplexMatrix& rho) {
  require_dim(model, rho, "lindblad_adjoint_apply");
  const ComplexMatrix& g = model.g();
  ComplexMatrix out = g * rho + rho * g.adjoint();
  for (const auto& l : model.jumps()) out.noalias() += l * rho * l.adjoint();
  return out;
}

ComplexMatrix superoperator(const LindbladModel& model, Picture picture) {
  const auto n = static_cast<Eigen::Index>(model.dim());
  if (n > 24) throw InputError("superoperator: explicit form limited to dim ≤ 24");
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix& g = model.g();
  ComplexMatrix s(n * n, n * n);
  if (picture == Picture::heisenberg) {
    s = Eigen::kroneckerProduct(g.transpose(), id).eval() + Eigen::kroneckerProduct(id, g.adjoint()).eval();
    for (const auto& l : model.jumps()) s += Eigen::kroneckerProduct(l.transpose(), l.adjoint()).eval();
  } else {
    s = Eigen::kroneckerProduct(id, g).eval() + Eigen::kroneckerProduct(g.conjugate(), id).eval();
    for (const auto& l : model.jumps()) s += Eigen::kroneckerProduct(l.conjugate(), l).eval();
  }
  return s;
}

ComplexMatrix choi_matrix(const ComplexMatrix& superop, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (superop.rows() != d * d || superop.cols() != d * d) throw InputError("choi_matrix: dimension mismatch");
  ComplexMatrix choi(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) choi(i * d + k, j * d + l) = superop(k + l * d, i + j * d);
  return choi;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  }
  void matrix(const ComplexMatrix& a) {
    const std::int64_t r = a.rows();
    bytes(&r, sizeof r);
    bytes(a.data(), sizeof(Complex) * static_cast<std::size_t>(a.size()));
  }
};

}  // namespace

std::string model_fingerprint(const LindbladModel& model) {
  Fnv1a f;
  const unsigned char mode = model.mode() == TruncationMode::exact ? 0 : 1;
  f.bytes(&mode, 1);
  f.matrix(model.hamiltonian());
  for (const auto& l : model.jumps()) f.matrix(l);
  f.matrix(model.loss());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

}  // namespace qds
