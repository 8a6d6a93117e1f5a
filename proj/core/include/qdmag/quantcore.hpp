#pragma once

// Dense complex linear algebra shared by every other module: state types,
// Kronecker products, Hermitian eigendecomposition and distances.

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qdmag {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kStateTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;
/// Asymmetry above this is treated as an upstream bug, not rounding.
inline constexpr double kHermitianRejectTolerance = 1e-8;

/// max_ij |m_ij - conj(m_ji)|
double hermitian_defect(const CMatrix& m);
double max_abs(const CMatrix& m);
CMatrix hermitian_part(const CMatrix& m);

/// Normalized state vector of a d-level system (d = 2^N for N dots).
class PureState {
 public:
  PureState() = default;
  /// Throws InvariantViolation unless the norm is 1 within 1e-12.
  explicit PureState(CVector amplitudes);

  /// Scales `v` to unit norm; throws std::invalid_argument for a zero vector.
  static PureState normalized(const CVector& v);

  const CVector& amplitudes() const { return amplitudes_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  /// Number of qubits; throws if the dimension is not a power of two.
  int qubits() const;

 private:
  CVector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates hermiticity, unit trace and positivity.
  explicit DensityMatrix(CMatrix entries);

  /// Wraps a matrix produced by a CPTP map from a valid state; no eigen check.
  static DensityMatrix trusted(CMatrix entries);

  const CMatrix& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

 private:
  struct TrustedTag {};
  DensityMatrix(CMatrix entries, TrustedTag) : entries_(std::move(entries)) {}
  CMatrix entries_;
};

class HermitianOperator {
 public:
  HermitianOperator() = default;
  /// Throws InvariantViolation if the defect exceeds 1e-12 (relative to the
  /// largest entry for operators carrying units).
  explicit HermitianOperator(CMatrix entries);

  const CMatrix& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

 private:
  CMatrix entries_;
};

/// Eigenvalues ascending; columns of `vectors` are orthonormal eigenvectors
/// whose first non-negligible component is real and positive.
struct EigenSystem {
  RVector values;
  CMatrix vectors;
};

/// Kronecker product in the listed order (first factor = most significant index).
CMatrix tensor(std::span<const CMatrix> factors);
CMatrix tensor(std::initializer_list<CMatrix> factors);
CVector tensor_vectors(std::span<const CVector> factors);

/// Symmetrizes before decomposing; rejects non-square input and asymmetry
/// above kHermitianRejectTolerance (relative to the largest entry).
EigenSystem herm_eig(const CMatrix& h);
EigenSystem herm_eig(const HermitianOperator& h);

DensityMatrix dm_from_pure(const PureState& psi);

/// (1/2) sum |eig(rho - sigma)|
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

namespace pauli {
CMatrix identity();
CMatrix x();
CMatrix y();
CMatrix z();
}  // namespace pauli

/// Computational basis vector |index> of dimension `dim`.
CVector basis_vector(Eigen::Index dim, Eigen::Index index);

}  // namespace qdmag
