#include "resfluor/operators.hpp"

#include "resfluor/errors.hpp"
#include "resfluor/geometry.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace resfluor {

namespace {

// Embed the 2x2 single-site operator `local` at `site`.
CMatrix embed(int atoms, int site, const Eigen::Matrix2cd& local) {
  if (atoms < 1 || atoms > kMaxAtoms || site < 0 || site >= atoms) {
    std::ostringstream msg;
    msg << "site " << site << " invalid for a register of " << atoms << " atoms";
    throw Error(ErrorCategory::Domain, msg.str());
  }
  const Eigen::Index dim = hilbert_dim(atoms);
  // bit position of `site` in the basis index; atom 0 is the most significant bit
  const Eigen::Index shift = atoms - 1 - site;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index row = 0; row < dim; ++row) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      const Eigen::Index rest_mask = ~(Eigen::Index{1} << shift);
      if ((row & rest_mask) != (col & rest_mask)) continue;
      out(row, col) = local((row >> shift) & 1, (col >> shift) & 1);
    }
  }
  return out;
}

}  // namespace

OperatorDense::OperatorDense(int atoms, CMatrix matrix) : atoms_(atoms), matrix_(std::move(matrix)) {
  if (atoms < 1 || atoms > kMaxAtoms) {
    throw Error(ErrorCategory::Domain, "operator register size out of range");
  }
  const Eigen::Index dim = hilbert_dim(atoms);
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    std::ostringstream msg;
    msg << "operator is " << matrix_.rows() << "x" << matrix_.cols() << ", expected " << dim
        << "x" << dim << " for " << atoms << " atoms";
    throw Error(ErrorCategory::Construction, msg.str());
  }
}

OperatorDense OperatorDense::hermitian(int atoms, CMatrix matrix) {
  OperatorDense op(atoms, std::move(matrix));
  if (!op.is_hermitian()) {
    throw Error(ErrorCategory::Construction, "operator claimed Hermitian is not");
  }
  return op;
}

bool OperatorDense::is_hermitian(double tolerance) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() < tolerance;
}

Eigen::Index hilbert_dim(int atoms) { return Eigen::Index{1} << atoms; }

CMatrix sigma_plus(int atoms, int site) {
  Eigen::Matrix2cd local = Eigen::Matrix2cd::Zero();
  local(0, 1) = 1.0;
  return embed(atoms, site, local);
}

CMatrix sigma_minus(int atoms, int site) {
  Eigen::Matrix2cd local = Eigen::Matrix2cd::Zero();
  local(1, 0) = 1.0;
  return embed(atoms, site, local);
}

CMatrix sigma_z(int atoms, int site) {
  Eigen::Matrix2cd local = Eigen::Matrix2cd::Zero();
  local(0, 0) = 1.0;
  local(1, 1) = -1.0;
  return embed(atoms, site, local);
}

CVector vec(const CMatrix& op) {
  return Eigen::Map<const CVector>(op.data(), op.size());
}

CMatrix unvec(const CVector& v) {
  const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (dim * dim != v.size()) {
    throw Error(ErrorCategory::Domain, "vector length is not a perfect square");
  }
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

CRowVector trace_functional(const CMatrix& a) {
  // Tr[A X] = sum_ij A(j,i) X(i,j) = vec(A^T) . vec(X)
  const CMatrix at = a.transpose();
  return Eigen::Map<const CRowVector>(at.data(), at.size());
}

void add_kron(CMatrix& out, Complex coeff, const CMatrix& a, const CMatrix& b) {
  struct Entry {
    Eigen::Index row, col;
    Complex value;
  };
  auto nonzeros = [](const CMatrix& m) {
    std::vector<Entry> entries;
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      for (Eigen::Index row = 0; row < m.rows(); ++row) {
        if (m(row, col) != Complex(0.0)) entries.push_back({row, col, m(row, col)});
      }
    }
    return entries;
  };
  const auto a_nz = nonzeros(a);
  const auto b_nz = nonzeros(b);
  const Eigen::Index br = b.rows();
  const Eigen::Index bc = b.cols();
  for (const auto& ea : a_nz) {
    const Complex scaled = coeff * ea.value;
    for (const auto& eb : b_nz) {
      out(ea.row * br + eb.row, ea.col * bc + eb.col) += scaled * eb.value;
    }
  }
}

}  // namespace resfluor
