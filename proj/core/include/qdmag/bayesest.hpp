#pragma once

// Bayesian estimation of the field from the averaged output states: Gaussian
// prior quadrature, the optimal (Personick) observable, posterior variance,
// projective-measurement gains, SLD Fisher information and the Van Trees bound.

#include <vector>

#include "qdmag/boxchannel.hpp"
#include "qdmag/quantcore.hpp"

namespace qdmag {

/// Gaussian prior over the field, Tesla.
struct GaussianPrior {
  double B0 = 7e-3;
  double dB = 4e-3;

  GaussianPrior() = default;
  GaussianPrior(double mean, double stddev);
  double variance() const { return dB * dB; }
};

struct QuadratureGrid {
  std::vector<double> nodes;    ///< Tesla
  std::vector<double> weights;  ///< sum to 1
};

inline constexpr int kDefaultQuadratureNodes = 64;
/// Relative support threshold on the eigenvalues of the averaged state.
inline constexpr double kSupportThreshold = 1e-12;

/// B_j = B0 + sqrt(2) dB x_j, w_j = h_j / sqrt(pi) from the n-point
/// Gauss-Hermite rule; nodes are exactly symmetric about B0.
QuadratureGrid gauss_hermite_grid(const GaussianPrior& prior, int n_nodes);

/// Rule for integrals against the prior of integrands that oscillate in B at
/// angular frequencies up to `max_rate` (rad/T). Uses the n-point
/// Gauss-Hermite rule while it resolves that frequency; beyond, a composite
/// Gauss-Legendre rule on B0 +- 9 dB with n/4 points per panel and panels
/// at most 10/max_rate wide. Nodes are exactly symmetric about B0.
QuadratureGrid prior_quadrature(const GaussianPrior& prior, int n_nodes, double max_rate);

struct MeanStates {
  CMatrix rho_bar;                 ///< sum w_j rho_{B_j}
  CMatrix rho_bar_prime;           ///< sum w_j B_j rho_{B_j}, Tesla
  CMatrix rho_bar_prime_centered;  ///< sum w_j (B_j - B0) rho_{B_j}, Tesla
};

struct EstimationOutcome {
  HermitianOperator L;        ///< optimal observable, Tesla
  CMatrix L_centered;         ///< L - B0 * identity
  RVector spectrum;           ///< eigenvalues of L, ascending, Tesla
  CMatrix eigenvectors;       ///< columns aligned with `spectrum`
  RVector probabilities;      ///< <v_k| rho_bar |v_k>
  double gain = 0.0;          ///< prior variance minus posterior variance, T^2
  double var_est = 0.0;       ///< T^2
  double ratio = 1.0;         ///< var_est / dB^2
};

struct BasisGain {
  double gain;
  double ratio;
};

/// Solves (L rho + rho L)/2 = rho' on the support of rho; the kernel block is
/// set to the prior mean tr(rho') / tr(rho).
HermitianOperator personick_observable(const CMatrix& rho_bar, const CMatrix& rho_bar_prime);

/// Centered solve: returns L - B0 for rho' already shifted by B0 rho.
CMatrix personick_centered(const CMatrix& rho_bar, const CMatrix& rho_bar_prime_centered);

EstimationOutcome estimation_variance(const CMatrix& rho_bar, const CMatrix& rho_bar_prime,
                                      const GaussianPrior& prior);

/// Variance reduction of a fixed projective measurement whose outcome labels
/// are chosen optimally. Columns of `basis` must be orthonormal.
BasisGain basis_gain(const CMatrix& basis, const CMatrix& rho_bar, const CMatrix& rho_bar_prime,
                     const GaussianPrior& prior);

/// Estimation problem at one evolution time for up to `max_dots` dots: prior,
/// quadrature and the prior-averaged product channels.
class BayesProblem {
 public:
  BayesProblem(const DotModel& model, const GaussianPrior& prior, QuadratureGrid grid, double t,
               int max_dots = kMaxDots);
  /// Quadrature from prior_quadrature, resolving the fastest oscillation of
  /// an N-dot state, N |d Omega / dB| t.
  BayesProblem(const DotModel& model, const GaussianPrior& prior, int n_nodes, double t, int max_dots = kMaxDots);

  const GaussianPrior& prior() const { return prior_; }
  const QuadratureGrid& grid() const { return grid_; }
  double time() const { return t_; }
  int max_dots() const { return average_.max_dots(); }

  MeanStates mean_states(const CMatrix& rho0) const;
  EstimationOutcome evaluate(const CMatrix& rho0) const;
  EstimationOutcome evaluate(const PureState& psi) const;

  /// sum_j w_j Lambda*_j(Lc^2 - 2 (B_j - B0) Lc) for a centered observable Lc.
  /// <psi|M|psi> + (quadrature prior variance) is the posterior variance of
  /// measuring Lc + B0 on the state evolved from psi.
  CMatrix iteration_matrix(const CMatrix& L_centered) const;

 private:
  GaussianPrior prior_;
  QuadratureGrid grid_;
  double t_;
  ProductChannelMixture average_;   ///< sum_j w_j Lambda_j
  ProductChannelMixture centered_;  ///< sum_j w_j (B_j - B0) Lambda_j
};

/// Averaged states at time t; rho_bar is validated as a density matrix.
MeanStates mean_states(const PureState& psi0, const DotModel& model, double t, const QuadratureGrid& grid);

struct FisherInformation {
  double value = 0.0;       ///< F_B with step delta, 1/T^2
  double value_half = 0.0;  ///< F_B with step delta/2
  bool converged = true;    ///< relative change on halving below 1%
};

/// SLD quantum Fisher information of rho_B(t) by central differences.
FisherInformation sld_fisher(const PureState& psi0, const DotModel& model, double t, double field_tesla,
                             double delta_tesla);

/// 1 / (sum_j w_j F_{B_j} + 1/dB^2); the step defaults to 1e-3 dB.
double van_trees_bound(const PureState& psi0, const DotModel& model, double t, const GaussianPrior& prior,
                       const QuadratureGrid& grid, double delta_tesla = 0.0);

}  // namespace qdmag
