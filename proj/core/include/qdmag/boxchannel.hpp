#pragma once

// Closed-form single-dot decoherence channel of the box model, its Kraus
// representation, and its N-fold product (and dual) acting on 2^N x 2^N matrices.

#include <array>
#include <span>
#include <vector>

#include "qdmag/physics.hpp"
#include "qdmag/quantcore.hpp"
#include "qdmag/spinbath.hpp"

namespace qdmag {

/// Mixing data of the 2x2 block {|up, m>, |down, m+1>} of sector K.
/// Energies and couplings in rad/ns.
struct MixingData {
  HalfInt K;
  HalfInt m;
  double chi;        ///< half the spectral gap of the block
  double sin_theta;  ///< down-component of the upper eigenvector
  double cos_theta;  ///< up-component of the upper eigenvector
  double e_m;        ///< (Omega + alpha m) / 2
  double m_km;       ///< (alpha/2) sqrt(K(K+1) - m(m+1))
  double e_plus;     ///< upper eigenvalue of the block
};

/// Valid for m in {-K-1, ..., K}. At the boundaries (M = 0) the block is
/// diagonal and the angle is 0 or pi/2 depending on which level lies higher.
MixingData mixing(HalfInt K, HalfInt m, double omega, double alpha);

/// Survival amplitude cos^2(theta) e^{-i chi t} + sin^2(theta) e^{+i chi t}.
Complex amplitude_X(HalfInt K, HalfInt m, double field_tesla, double t, double alpha, double g_factor);

/// Channel coefficients: rho00 -> A rho00 + (1-A) rho11, rho01 -> E rho01.
struct ChannelCoeffs {
  double A = 1.0;
  Complex E{1.0, 0.0};
  double B = 0.0;  ///< Tesla
  double t = 0.0;  ///< ns

  static ChannelCoeffs identity() { return {}; }
};

/// Throws InvariantViolation unless 0 <= A <= 1 and |E| <= A (with tolerances).
void check_coefficients(const ChannelCoeffs& c);

/// A = sum P |X_{K,m}|^2 and E = sum P X_{K,m} X_{K,m-1}, m = -K..K.
/// A(B) == A(-B) bit-for-bit.
ChannelCoeffs coefficients_AE(const BathSpec& bath, double field_tesla, double t, double g_factor);

/// Precomputes the sector data of a bath at one field value so that many time
/// points can be evaluated cheaply.
class ChannelEvaluator {
 public:
  ChannelEvaluator(const BathSpec& bath, double field_tesla, double g_factor);
  ChannelCoeffs at(double t) const;

 private:
  struct Level {
    double P;
    // Indexed by m + K + 1 for m = -K-1..K.
    std::vector<double> chi;
    std::vector<double> polarization;  ///< cos(2 theta) = D / (2 chi)
    std::vector<double> flip;          ///< sin^2(2 theta) = 1 - polarization^2
  };
  double field_;
  std::vector<Level> levels_;
};

/// Bath plus electron g-factor: everything needed to evaluate rho_B(t).
struct DotModel {
  BathSpec bath;
  double g_factor = -0.44;

  ChannelCoeffs coefficients(double field_tesla, double t) const {
    return coefficients_AE(bath, field_tesla, t, g_factor);
  }
};

/// Builds the default model for a material: bath of n_bath nuclei with the
/// coupling chosen by `mode`.
DotModel make_dot_model(const Material& material, AlphaMode mode, int n_bath);

/// Time below which the box model applies, n_phys / A_total (ns).
double box_model_validity_ns(const Material& material);

struct KrausSet {
  std::array<Eigen::Matrix2cd, 4> ops;

  Eigen::Matrix2cd completeness() const;  ///< sum K^dagger K
  Eigen::Matrix4cd choi() const;          ///< sum_ij |i><j| (x) Phi(|i><j|)
};

KrausSet kraus_set(const ChannelCoeffs& c);

DensityMatrix apply_single(const DensityMatrix& rho, const ChannelCoeffs& c);
DensityMatrix apply_n_dots(const DensityMatrix& rho, const ChannelCoeffs& c);
HermitianOperator dual_apply_n_dots(const HermitianOperator& x, const ChannelCoeffs& c);

inline constexpr int kMaxDots = 5;

/// Weighted sum of identical product channels, sum_j w_j Lambda_j^{(x)N}, with
/// arbitrary real weights. Each term's action on |i><j| depends on (A_j, E_j)
/// only through monomials A^a (1-A)^b E^c conj(E)^d of total degree N, so the
/// weighted sums of those monomials are accumulated once and the mixture is
/// applied at a cost independent of the number of terms.
class ProductChannelMixture {
 public:
  ProductChannelMixture() = default;
  ProductChannelMixture(std::span<const double> weights, std::span<const ChannelCoeffs> channels,
                        int max_dots = kMaxDots);

  int max_dots() const { return max_dots_; }
  /// sum_j w_j A_j^a (1-A_j)^b E_j^c conj(E_j)^d, a+b+c+d <= max_dots.
  Complex moment(int a, int b, int c, int d) const;

  CMatrix apply(const CMatrix& m) const;
  /// The dual mixture sum_j w_j Lambda_j^*{(x)N}.
  CMatrix apply_dual(const CMatrix& m) const;

 private:
  CMatrix apply_impl(const CMatrix& m, bool dual) const;
  std::size_t index(int a, int b, int c, int d) const;
  int max_dots_ = 0;
  std::vector<Complex> moments_;
};

/// In-place product channel on every qubit of a 2^N x 2^N matrix (any matrix,
/// not only states). The dual map is the same call with conj(E).
void apply_product_channel(CMatrix& m, double A, Complex E);

}  // namespace qdmag
