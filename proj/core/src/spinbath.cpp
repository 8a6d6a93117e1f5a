#include "qdmag/spinbath.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qdmag/errors.hpp"

namespace qdmag {
namespace {

void check_bath_args(int n, HalfInt s) {
  if (n < 1) throw std::invalid_argument("bath: n must be >= 1");
  if (n > kMaxBathSize) throw std::invalid_argument("bath: n exceeds " + std::to_string(kMaxBathSize));
  if (s.twice < 1) throw std::invalid_argument("bath: spin must be a positive half-integer");
}

// C(a, b) with C(a, b) = 0 for a < b or a < 0.
BigInt binomial(long a, long b) {
  if (b < 0 || a < 0 || a < b) return 0;
  b = std::min(b, a - b);
  BigInt r = 1;
  for (long k = 1; k <= b; ++k) {
    r *= a - b + k;
    r /= k;
  }
  return r;
}

BigInt total_dimension(int n, HalfInt s) {
  BigInt total = 1;
  for (int i = 0; i < n; ++i) total *= s.twice + 1;
  return total;
}

}  // namespace

Multiplicities multiplicity_table(int n, HalfInt s) {
  check_bath_args(n, s);
  Multiplicities out;
  if (n == 1) {
    out[s] = 1;
    return out;
  }
  const int two_max = n * s.twice;
  for (int two_k = two_max % 2; two_k <= two_max; two_k += 2) {
    BigInt count = 0;
    for (int i = 0; i <= n; ++i) {
      // (s+1)n - (2s+1)i - K - 2, in units of 1/2
      const long twice_top = static_cast<long>(s.twice + 2) * n - 2L * (s.twice + 1) * i - two_k - 4;
      if (twice_top % 2 != 0) throw InvariantViolation("multiplicity_table: non-integer binomial argument");
      const BigInt term = binomial(n, i) * binomial(twice_top / 2, n - 2);
      if (i % 2 == 0)
        count += term;
      else
        count -= term;
    }
    if (count < 0) throw InvariantViolation("multiplicity_table: negative multiplet count");
    if (count > 0) out[HalfInt{two_k}] = count;
  }
  return out;
}

Multiplicities multiplicity_oracle(int n, HalfInt s) {
  check_bath_args(n, s);
  Multiplicities current{{s, BigInt(1)}};
  for (int step = 1; step < n; ++step) {
    Multiplicities next;
    for (const auto& [k, count] : current) {
      for (int two_j = std::abs(k.twice - s.twice); two_j <= k.twice + s.twice; two_j += 2)
        next[HalfInt{two_j}] += count;
    }
    current = std::move(next);
  }
  return current;
}

std::vector<BathWeight> BathSpec::weights() const {
  std::vector<BathWeight> out;
  for (const auto& level : levels)
    for (int two_m = -level.K.twice; two_m <= level.K.twice; two_m += 2)
      out.push_back({level.K, HalfInt{two_m}, level.weight_per_m});
  return out;
}

double BathSpec::total_weight() const {
  double sum = 0.0;
  for (const auto& level : levels) sum += level.weight_per_m * (level.K.twice + 1);
  return sum;
}

BathSpec bath_weights(int n, HalfInt s, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("bath_weights: alpha must be > 0");
  const Multiplicities counts = multiplicity_table(n, s);
  const BigInt total = total_dimension(n, s);

  BigInt states = 0;
  for (const auto& [k, count] : counts) states += count * (k.twice + 1);
  if (states != total) throw InvariantViolation("bath_weights: multiplet dimensions do not add up");

  BathSpec spec;
  spec.n_bath = n;
  spec.s = s;
  spec.alpha = alpha;
  const double denom = total.convert_to<double>();
  for (const auto& [k, count] : counts) spec.levels.push_back({k, count, count.convert_to<double>() / denom});
  return spec;
}

ExactCentralSpin::ExactCentralSpin(int n, double field_tesla, double alpha, double g_factor)
    : n_(n), field_(field_tesla) {
  if (n < 1) throw std::invalid_argument("ExactCentralSpin: n must be >= 1");
  if (n > 6 || (2 << n) > kMaxDimension)
    throw std::invalid_argument("ExactCentralSpin: Hilbert dimension exceeds " + std::to_string(kMaxDimension));

  const Eigen::Index dim = Eigen::Index{2} << n;
  const Eigen::Index bath_dim = Eigen::Index{1} << n;
  const double omega = larmor_omega(field_tesla, g_factor);

  // Basis index = electron bit (most significant) followed by nuclear bits;
  // bit value 0 is spin up.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  auto sz = [](Eigen::Index bit) { return bit == 0 ? 0.5 : -0.5; };
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const Eigen::Index e = idx / bath_dim;
    const Eigen::Index nuc = idx % bath_dim;
    double iz = 0.0;
    for (int k = 0; k < n; ++k) iz += sz((nuc >> (n - 1 - k)) & 1);
    h(idx, idx) = omega * sz(e) + alpha * sz(e) * iz;

    // (alpha/2) S^- I^+_k : electron up -> down, nucleus k down -> up.
    if (e == 0) {
      for (int k = 0; k < n; ++k) {
        const Eigen::Index mask = Eigen::Index{1} << (n - 1 - k);
        if (nuc & mask) {
          const Eigen::Index target = bath_dim + (nuc & ~mask);
          h(target, idx) += 0.5 * alpha;
          h(idx, target) += 0.5 * alpha;
        }
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalFailure("ExactCentralSpin: eigensolver failed");
  energies_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors().cast<Complex>();
}

CMatrix ExactCentralSpin::evolve(const CMatrix& rho_electron, double t) const {
  if (rho_electron.rows() != 2 || rho_electron.cols() != 2)
    throw std::invalid_argument("ExactCentralSpin::evolve: electron state must be 2x2");
  const Eigen::Index bath_dim = Eigen::Index{1} << n_;
  const Eigen::Index dim = 2 * bath_dim;

  CVector phases(dim);
  for (Eigen::Index k = 0; k < dim; ++k) phases(k) = std::polar(1.0, -energies_(k) * t);
  const CMatrix u = eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();

  const CMatrix initial = tensor({rho_electron, CMatrix::Identity(bath_dim, bath_dim) / double(bath_dim)});
  const CMatrix full = u * initial * u.adjoint();

  CMatrix reduced = CMatrix::Zero(2, 2);
  for (Eigen::Index a = 0; a < 2; ++a)
    for (Eigen::Index b = 0; b < 2; ++b)
      for (Eigen::Index k = 0; k < bath_dim; ++k) reduced(a, b) += full(a * bath_dim + k, b * bath_dim + k);
  return reduced;
}

ExactChannelSample ExactCentralSpin::sample(double t) const {
  CMatrix up = CMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  const CMatrix plus = CMatrix::Constant(2, 2, 0.5);
  const CMatrix from_up = evolve(up, t);
  const CMatrix from_plus = evolve(plus, t);
  return {from_up(0, 0).real(), 2.0 * from_plus(0, 1), field_, t};
}

ExactChannelSample exact_reference_channel(int n, double field_tesla, double t, double alpha, double g_factor) {
  return ExactCentralSpin(n, field_tesla, alpha, g_factor).sample(t);
}

}  // namespace qdmag
