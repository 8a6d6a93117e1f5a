#pragma once

// Combinatorics of a maximally mixed bath of n spin-s nuclei and a brute-force
// central-spin simulator used to cross-check the closed-form channel.

#include <complex>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qdmag/physics.hpp"
#include "qdmag/quantcore.hpp"

namespace qdmag {

using BigInt = boost::multiprecision::cpp_int;

/// Total-spin multiplet K -> number of multiplets.
using Multiplicities = std::map<HalfInt, BigInt>;

inline constexpr int kMaxBathSize = 200;

/// Closed-form alternating binomial sum for the multiplet counts.
/// n == 1 is the single multiplet K = s.
Multiplicities multiplicity_table(int n, HalfInt s);

/// Same counts by repeated angular-momentum addition of one spin-s at a time.
Multiplicities multiplicity_oracle(int n, HalfInt s);

/// One total-spin sector; P is the same for every projection m = -K..K.
struct BathLevel {
  HalfInt K;
  BigInt multiplets;
  double weight_per_m;
};

struct BathWeight {
  HalfInt K;
  HalfInt m;
  double P;
};

struct BathSpec {
  int n_bath = 0;
  HalfInt s;
  double alpha = 0.0;  ///< rad/ns
  std::vector<BathLevel> levels;

  /// Expanded (K, m, P) list, m ascending within each K.
  std::vector<BathWeight> weights() const;
  double total_weight() const;
};

/// P_{K,m} = count(K) / (2s+1)^n for the maximally mixed bath.
BathSpec bath_weights(int n, HalfInt s, double alpha);

struct ExactChannelSample {
  double A_exact;
  Complex E_exact;
  double B;  ///< Tesla
  double t;  ///< ns
};

/// Electron spin coupled to n spin-1/2 nuclei by the isotropic box-model
/// Hamiltonian, diagonalized once per field value.
class ExactCentralSpin {
 public:
  static constexpr int kMaxDimension = 128;

  ExactCentralSpin(int n, double field_tesla, double alpha, double g_factor);

  /// Reduced electron state at time t for rho_el(0) (x) identity / 2^n.
  CMatrix evolve(const CMatrix& rho_electron, double t) const;
  ExactChannelSample sample(double t) const;

  int nuclei() const { return n_; }

 private:
  int n_;
  double field_;
  RVector energies_;
  CMatrix eigenvectors_;
};

ExactChannelSample exact_reference_channel(int n, double field_tesla, double t, double alpha, double g_factor);

}  // namespace qdmag
