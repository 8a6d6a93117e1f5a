#pragma once

// Iterative optimal-initial-state search with random restarts, the fixed
// ansatz families (GHZ, |+>^N, |+>^k|0>^{N-k}, GHZ-plus superpositions) and a
// random product-state baseline.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qdmag/bayesest.hpp"

namespace qdmag {

struct OptimizerConfig {
  int restarts = 30;
  double tol = 1e-9;  ///< relative change of the ratio, two iterations in a row
  int max_iter = 500;
  std::uint64_t seed = 20150907;
  unsigned threads = 1;  ///< workers for independent restarts

  void validate() const;
  /// 30 restarts up to three dots, 60 for four or five.
  static int default_restarts(int dots) { return dots <= 3 ? 30 : 60; }
};

struct Strategy {
  PureState state;
  EstimationOutcome outcome;
  std::string label;
  int iterations = 0;
  bool converged = false;
};

enum class AnsatzKind { ghz, plus_product, mixed_product, ghz_plus };

struct Ansatz {
  AnsatzKind kind = AnsatzKind::ghz;
  int plus_count = 0;  ///< mixed_product(k): k qubits in |+>, the rest in |0>
  double g = 1.0;      ///< ghz_plus(g)

  static Ansatz ghz() { return {AnsatzKind::ghz}; }
  static Ansatz plus_product() { return {AnsatzKind::plus_product}; }
  static Ansatz mixed_product(int k) { return {AnsatzKind::mixed_product, k}; }
  static Ansatz ghz_plus(double g) { return {AnsatzKind::ghz_plus, 0, g}; }

  /// "ghz", "plus_product", "mixed_product(k)" or "ghz_plus(g)".
  std::string label() const;
  static Ansatz parse(const std::string& label);
};

/// Throws std::invalid_argument for N outside [1, kMaxDots] or bad parameters.
PureState ansatz(const Ansatz& a, int dots);

/// splitmix64 mix of a master seed with stream counters.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0);

/// Complex-Gaussian vector normalized to unit length.
PureState haar_random_state(Eigen::Index dim, std::mt19937_64& rng);

/// One step: optimal observable for psi, then the lowest eigenvector of
/// sum_j w_j Lambda*_j(L^2 - 2 B_j L).
PureState iterate_once(const PureState& psi, const BayesProblem& problem);

/// Iterates from `start` until the ratio settles; `trace` (if given)
/// receives the ratio after every evaluation, starting with `start`.
Strategy refine_from(const PureState& start, const BayesProblem& problem, const OptimizerConfig& cfg,
                     std::vector<double>* trace = nullptr);

/// Best result over Haar-random restarts (and any warm starts, which rank
/// first on ties). converged reports whether the winning run met `tol`.
Strategy optimize_state(int dots, const BayesProblem& problem, const OptimizerConfig& cfg,
                        std::span<const PureState> warm_starts = {});
Strategy optimize_state(int dots, const DotModel& model, double t, const GaussianPrior& prior,
                        const OptimizerConfig& cfg, int quad_nodes = kDefaultQuadratureNodes);

Strategy evaluate_fixed_state(const PureState& psi, const BayesProblem& problem, std::string label);

/// Grid search over g followed by golden-section refinement to 1e-4.
Strategy scan_ghz_plus(int dots, const BayesProblem& problem, std::span<const double> g_grid);

/// Best of `samples` products of independent Haar-random qubit states.
Strategy random_product_baseline(int dots, const BayesProblem& problem, int samples, std::uint64_t seed);

}  // namespace qdmag
