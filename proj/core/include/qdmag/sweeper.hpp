#pragma once

// Time sweeps of the optimal strategy, detection of the transitions in the
// optimal observable's spectrum, and comparisons across dot counts and priors.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qdmag/optimizer.hpp"

namespace qdmag {

struct SweepRecord {
  double t = 0.0;  ///< ns
  double ratio_opt = 1.0;
  std::map<std::string, double> ansatz_ratios;  ///< keyed by Ansatz::label()
  RVector spectrum;                             ///< eigenvalues of the optimal L, ascending, Tesla
  RVector probabilities;
  std::map<std::string, double> state_fidelities;
  std::string regime;
  PureState state;
  double population_gain = 0.0;  ///< gain of measuring in the computational basis, T^2
  int iterations = 0;
  bool converged = false;
};

struct SweepOptions {
  OptimizerConfig optimizer;
  int quad_nodes = kDefaultQuadratureNodes;
  /// Called after every finished time point with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

/// `points` times from start to end, inclusive; logarithmic spacing needs start > 0.
std::vector<double> time_grid(double start_ns, double end_ns, int points, bool log_spacing);

/// Ansatz family evaluated at every sweep point: ghz, plus_product and
/// mixed_product(k) for k < N.
std::vector<Ansatz> sweep_ansatze(int dots);

/// Optimizes at one time, warm-starting from `warm` in addition to the
/// random restarts, and fills every record field.
SweepRecord sweep_point(int dots, const DotModel& model, const GaussianPrior& prior, double t,
                        const SweepOptions& options, std::span<const PureState> warm = {},
                        std::uint64_t stream = 0);

/// Pass 1 optimizes every time point independently (in parallel); passes 2
/// and 3 re-optimize forward and backward from the neighbor's optimum and
/// keep whichever result is better, so basins carry across the grid.
std::vector<SweepRecord> time_sweep(int dots, const DotModel& model, const GaussianPrior& prior,
                                    std::span<const double> t_grid, const SweepOptions& options);

enum class TransitionKind { zeroth, first };
std::string to_string(TransitionKind kind);

struct TransitionEvent {
  double t_lo = 0.0;
  double t_hi = 0.0;
  TransitionKind kind = TransitionKind::zeroth;
  double spectrum_jump = 0.0;       ///< Tesla
  double kink_score = 0.0;          ///< second difference over its median
  double state_overlap_drop = 0.0;  ///< 1 - overlap of the optimal states across the bracket
};

struct TransitionConfig {
  double theta0 = 5.0;        ///< jump threshold, multiples of the median jump
  double theta1 = 10.0;       ///< kink threshold, multiples of the median second difference
  double overlap = 0.9;       ///< states closer than this count as the same branch
  double bracket_rel = 0.02;  ///< refine until t_hi - t_lo <= bracket_rel * t_lo
  bool log_grid = true;
};

/// Re-optimizes at a time inside a bracket, seeded with the optimal states of
/// the bracketing records.
using RecordEvaluator = std::function<SweepRecord(double t, std::span<const PureState> warm)>;

/// Flags zeroth-kind events (spectrum jump together with a change of optimal
/// state) and first-kind events (kink of the spectrum on a continuous branch).
/// With an evaluator, each bracket is narrowed to `bracket_rel`.
std::vector<TransitionEvent> detect_transitions(std::span<const SweepRecord> records, const TransitionConfig& cfg,
                                                const RecordEvaluator& evaluate = {});

struct NComparisonRow {
  int dots = 0;
  double t_star = 0.0;  ///< ns
  double min_ratio = 1.0;
  double t_ghz = 0.0;  ///< argmin of the GHZ curve, ns
  double min_ratio_ghz = 1.0;
};

std::vector<NComparisonRow> n_comparison(std::span<const int> dots_list, const DotModel& model,
                                         const GaussianPrior& prior, std::span<const double> t_grid,
                                         const SweepOptions& options);

struct PriorScanRow {
  int dots = 0;
  double B0 = 0.0;  ///< Tesla
  double dB = 0.0;  ///< Tesla
  double t_star = 0.0;
  double min_ratio = 1.0;
  double van_trees_ratio = 0.0;  ///< Van Trees bound over dB^2 at t_star
};

std::vector<PriorScanRow> prior_scan(std::span<const int> dots_list, const DotModel& model,
                                     std::span<const GaussianPrior> priors, std::span<const double> t_grid,
                                     const SweepOptions& options);

}  // namespace qdmag
