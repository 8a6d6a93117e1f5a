#include "qdmag/quantcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qdmag/errors.hpp"

namespace qdmag {

double hermitian_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_defect: matrix is not square");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CMatrix hermitian_part(const CMatrix& m) {
  CMatrix h = (m + m.adjoint()) * 0.5;
  // Force exact hermiticity: mirror the upper triangle.
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    h(i, i) = Complex(h(i, i).real(), 0.0);
    for (Eigen::Index j = i + 1; j < h.cols(); ++j) h(j, i) = std::conj(h(i, j));
  }
  return h;
}

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw std::invalid_argument("PureState: empty amplitude vector");
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > kStateTolerance)
    throw InvariantViolation("PureState: norm " + std::to_string(norm) + " is not 1");
}

PureState PureState::normalized(const CVector& v) {
  const double norm = v.norm();
  if (v.size() == 0 || norm == 0.0 || !std::isfinite(norm))
    throw std::invalid_argument("PureState: cannot normalize a zero vector");
  return PureState(v / norm);
}

int PureState::qubits() const {
  const auto d = static_cast<std::uint64_t>(dim());
  if (!std::has_single_bit(d)) throw std::invalid_argument("PureState: dimension is not a power of two");
  return std::countr_zero(d);
}

DensityMatrix::DensityMatrix(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
    throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
  if (hermitian_defect(entries_) > kStateTolerance)
    throw InvariantViolation("DensityMatrix: not Hermitian");
  if (std::abs(entries_.trace() - Complex(1.0)) > kStateTolerance)
    throw InvariantViolation("DensityMatrix: trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(entries_), Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPositivityTolerance)
    throw InvariantViolation("DensityMatrix: negative eigenvalue " +
                             std::to_string(solver.eigenvalues().minCoeff()));
}

DensityMatrix DensityMatrix::trusted(CMatrix entries) { return DensityMatrix(std::move(entries), TrustedTag{}); }

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("HermitianOperator: matrix is not square");
  if (hermitian_defect(entries_) > kStateTolerance * std::max(1.0, max_abs(entries_)))
    throw InvariantViolation("HermitianOperator: not Hermitian");
}

CMatrix tensor(std::span<const CMatrix> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor: empty factor list");
  for (const auto& f : factors)
    if (f.rows() != f.cols()) throw std::invalid_argument("tensor: factors must be square");
  CMatrix acc = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const CMatrix& f = factors[k];
    CMatrix next(acc.rows() * f.rows(), acc.cols() * f.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = acc(i, j) * f;
    acc = std::move(next);
  }
  return acc;
}

CMatrix tensor(std::initializer_list<CMatrix> factors) {
  return tensor(std::span<const CMatrix>(factors.begin(), factors.size()));
}

CVector tensor_vectors(std::span<const CVector> factors) {
  if (factors.empty()) throw std::invalid_argument("tensor_vectors: empty factor list");
  CVector acc = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    const CVector& f = factors[k];
    CVector next(acc.size() * f.size());
    for (Eigen::Index i = 0; i < acc.size(); ++i) next.segment(i * f.size(), f.size()) = acc(i) * f;
    acc = std::move(next);
  }
  return acc;
}

EigenSystem herm_eig(const CMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("herm_eig: matrix is not square");
  if (h.rows() == 0) throw std::invalid_argument("herm_eig: empty matrix");
  if (hermitian_defect(h) > kHermitianRejectTolerance * std::max(1.0, max_abs(h)))
    throw InvariantViolation("herm_eig: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success) throw NumericalFailure("herm_eig: eigensolver did not converge");

  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
    auto col = out.vectors.col(k);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double mag = std::abs(col(i));
      if (mag > 1e-10) {
        col *= std::conj(col(i)) / mag;
        col(i) = Complex(col(i).real(), 0.0);
        break;
      }
    }
  }
  return out;
}

EigenSystem herm_eig(const HermitianOperator& h) { return herm_eig(h.matrix()); }

DensityMatrix dm_from_pure(const PureState& psi) {
  const CVector& v = psi.amplitudes();
  if (v.norm() == 0.0) throw std::invalid_argument("dm_from_pure: zero vector");
  return DensityMatrix::trusted(v * v.adjoint());
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(rho.matrix() - sigma.matrix()),
                                                Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

namespace pauli {
CMatrix identity() { return CMatrix::Identity(2, 2); }
CMatrix x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
CMatrix y() {
  CMatrix m(2, 2);
  m << Complex(0.0), Complex(0.0, -1.0), Complex(0.0, 1.0), Complex(0.0);
  return m;
}
CMatrix z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

CVector basis_vector(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw std::invalid_argument("basis_vector: index out of range");
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

}  // namespace qdmag
