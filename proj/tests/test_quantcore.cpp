#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "qdmag/errors.hpp"
#include "qdmag/quantcore.hpp"

using namespace qdmag;
using qdmag::testing::Gen;

namespace {

const double kInvSqrt2 = std::numbers::sqrt2 / 2;

CVector plus() { return CVector::Constant(2, Complex(kInvSqrt2)); }

// Kronecker product written out entry by entry.
CMatrix kron_oracle(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

}  // namespace

TEST(Tensor, IdentityFactors) {
  EXPECT_TRUE(tensor({pauli::identity(), pauli::identity()}).isApprox(CMatrix::Identity(4, 4)));
}

TEST(Tensor, FirstFactorIsMostSignificant) {
  CMatrix expected = CMatrix::Zero(4, 4);
  expected.diagonal() << 1, 1, -1, -1;
  EXPECT_EQ(tensor({pauli::z(), pauli::identity()}), expected);
}

TEST(Tensor, SingleFactor) {
  Gen gen(1);
  const CMatrix a = gen.matrix(2, 2);
  EXPECT_EQ(tensor({a}), a);
}

TEST(Tensor, EmptyListRejected) {
  EXPECT_THROW(tensor(std::span<const CMatrix>{}), std::invalid_argument);
  EXPECT_THROW(tensor_vectors(std::span<const CVector>{}), std::invalid_argument);
}

TEST(Tensor, MatchesEntrywiseKronecker) {
  Gen gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = gen.matrix(2, 2), b = gen.matrix(2, 2), c = gen.matrix(2, 2);
    EXPECT_LT(max_abs(tensor({a, b, c}) - kron_oracle(kron_oracle(a, b), c)), 1e-12);
  }
}

TEST(Tensor, VectorsAgreeWithMatrices) {
  Gen gen(3);
  const CVector u = gen.vector(2), v = gen.vector(4);
  const std::vector<CVector> vs{u, v};
  const CVector uv = tensor_vectors(vs);
  EXPECT_LT(max_abs(CMatrix(uv * uv.adjoint()) - kron_oracle(u * u.adjoint(), v * v.adjoint())), 1e-12);
}

TEST(HermEig, DiagonalSortsAscending) {
  CMatrix h = CMatrix::Zero(3, 3);
  h.diagonal() << 3, 1, 2;
  const EigenSystem es = herm_eig(h);
  EXPECT_NEAR(es.values(0), 1, 1e-14);
  EXPECT_NEAR(es.values(1), 2, 1e-14);
  EXPECT_NEAR(es.values(2), 3, 1e-14);
  EXPECT_NEAR(std::abs(es.vectors(1, 0)), 1, 1e-14);
  EXPECT_NEAR(std::abs(es.vectors(2, 1)), 1, 1e-14);
  EXPECT_NEAR(std::abs(es.vectors(0, 2)), 1, 1e-14);
}

TEST(HermEig, PauliX) {
  const EigenSystem es = herm_eig(pauli::x());
  EXPECT_NEAR(es.values(0), -1, 1e-14);
  EXPECT_NEAR(es.values(1), 1, 1e-14);
  // First non-negligible component real and positive.
  EXPECT_NEAR(es.vectors(0, 0).real(), kInvSqrt2, 1e-14);
  EXPECT_NEAR(es.vectors(1, 0).real(), -kInvSqrt2, 1e-14);
  EXPECT_NEAR(es.vectors(0, 1).real(), kInvSqrt2, 1e-14);
  EXPECT_NEAR(es.vectors(1, 1).real(), kInvSqrt2, 1e-14);
}

TEST(HermEig, RejectsBadInput) {
  EXPECT_THROW(herm_eig(CMatrix::Zero(2, 3)), std::invalid_argument);
  CMatrix asym = CMatrix::Zero(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(herm_eig(asym), InvariantViolation);
}

TEST(HermEig, PropertyReconstructsRandomHermitian) {
  Gen gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 << gen.integer(1, 5);
    const CMatrix h = gen.hermitian(d);
    const EigenSystem es = herm_eig(h);
    const CMatrix v = es.vectors;
    EXPECT_LT(max_abs(v.adjoint() * v - CMatrix::Identity(d, d)), 1e-12);
    EXPECT_LT(max_abs(v * es.values.cast<Complex>().asDiagonal() * v.adjoint() - h), 1e-11);
    for (int k = 1; k < d; ++k) EXPECT_LE(es.values(k - 1), es.values(k));
  }
}

TEST(DmFromPure, Examples) {
  const DensityMatrix zero = dm_from_pure(PureState(basis_vector(2, 0)));
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = 1;
  EXPECT_EQ(zero.matrix(), expected);

  const DensityMatrix p = dm_from_pure(PureState::normalized(plus()));
  EXPECT_LT(max_abs(p.matrix() - CMatrix::Constant(2, 2, 0.5)), 1e-15);

  CVector ghz = CVector::Zero(4);
  ghz(0) = ghz(3) = kInvSqrt2;
  const CMatrix g = dm_from_pure(PureState(ghz)).matrix();
  CMatrix corners = CMatrix::Zero(4, 4);
  corners(0, 0) = corners(0, 3) = corners(3, 0) = corners(3, 3) = 0.5;
  EXPECT_LT(max_abs(g - corners), 1e-15);
}

TEST(PureState, NormalizationRules) {
  EXPECT_THROW(PureState::normalized(CVector::Zero(2)), std::invalid_argument);
  EXPECT_THROW(PureState(CVector::Constant(2, 1.0)), InvariantViolation);
  EXPECT_EQ(PureState::normalized(CVector::Constant(8, 2.0)).qubits(), 3);
  EXPECT_THROW(PureState::normalized(CVector::Constant(3, 1.0)).qubits(), std::invalid_argument);
}

TEST(DensityMatrix, Validation) {
  CMatrix bad_trace = CMatrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix{bad_trace}, InvariantViolation);
  CMatrix negative = CMatrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{negative}, InvariantViolation);
  CMatrix nonherm = CMatrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{nonherm}, InvariantViolation);
}

TEST(TraceDistance, Examples) {
  const DensityMatrix zero = dm_from_pure(PureState(basis_vector(2, 0)));
  const DensityMatrix one = dm_from_pure(PureState(basis_vector(2, 1)));
  const DensityMatrix p = dm_from_pure(PureState::normalized(plus()));
  EXPECT_NEAR(trace_distance(zero, zero), 0.0, 1e-15);
  EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(zero, p), kInvSqrt2, 1e-14);
  EXPECT_THROW(trace_distance(zero, DensityMatrix(CMatrix::Identity(4, 4) / 4.0)), std::invalid_argument);
}

TEST(TraceDistance, PropertyPureStatesMatchOverlapFormula) {
  // For pure states D = sqrt(1 - |<a|b>|^2).
  Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 << gen.integer(1, 4);
    const PureState a = gen.state(d), b = gen.state(d);
    const double overlap = std::norm(a.amplitudes().dot(b.amplitudes()));
    EXPECT_NEAR(trace_distance(dm_from_pure(a), dm_from_pure(b)), std::sqrt(1.0 - overlap), 1e-10);
  }
}

TEST(TraceDistance, PropertyMetricAxioms) {
  Gen gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 << gen.integer(1, 3);
    const DensityMatrix r(gen.density(d)), s(gen.density(d)), u(gen.density(d));
    const double rs = trace_distance(r, s);
    EXPECT_NEAR(rs, trace_distance(s, r), 1e-13);
    EXPECT_GE(rs, 0.0);
    EXPECT_LE(rs, 1.0 + 1e-12);
    EXPECT_LE(rs, trace_distance(r, u) + trace_distance(u, s) + 1e-12);
    // Unitary invariance.
    const CMatrix w = gen.unitary(d);
    EXPECT_NEAR(rs,
                trace_distance(DensityMatrix(hermitian_part(w * r.matrix() * w.adjoint())),
                               DensityMatrix(hermitian_part(w * s.matrix() * w.adjoint()))),
                1e-12);
  }
}

TEST(BasisVector, Bounds) {
  EXPECT_EQ(basis_vector(4, 2)(2), Complex(1.0));
  EXPECT_THROW(basis_vector(4, 4), std::invalid_argument);
}
