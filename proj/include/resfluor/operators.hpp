#pragma once

// Dense operators on the N-atom Hilbert space and their superoperator images.
//
// Basis: site-major tensor product, atom 1 is the slowest index; within a site
// the excited state |e> has index 0 and the ground state |g> index 1.
// Vectorization stacks columns: vec(rho)[col * dim + row] = rho(row, col), so
// vec(A rho B) = (B^T kron A) vec(rho).

#include <Eigen/Dense>

#include <complex>

namespace resfluor {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

inline constexpr double kHermitianTolerance = 1e-12;

/// Operator on the 2^N dimensional space of N two-level atoms.
class OperatorDense {
 public:
  OperatorDense(int atoms, CMatrix matrix);

  /// Same, additionally verifying max|A - A^dagger| < 1e-12.
  static OperatorDense hermitian(int atoms, CMatrix matrix);

  int atoms() const { return atoms_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const CMatrix& matrix() const { return matrix_; }

  bool is_hermitian(double tolerance = kHermitianTolerance) const;

 private:
  int atoms_;
  CMatrix matrix_;
};

Eigen::Index hilbert_dim(int atoms);

/// sigma^+ = |e><g| acting on `site` (0-based) of an `atoms`-atom register.
CMatrix sigma_plus(int atoms, int site);
CMatrix sigma_minus(int atoms, int site);
CMatrix sigma_z(int atoms, int site);

CVector vec(const CMatrix& op);
CMatrix unvec(const CVector& v);

/// Row vector t with t * vec(X) = Tr[A X].
CRowVector trace_functional(const CMatrix& a);

/// out += coeff * kron(a, b), touching only the nonzero entries of a and b.
void add_kron(CMatrix& out, Complex coeff, const CMatrix& a, const CMatrix& b);

}  // namespace resfluor
