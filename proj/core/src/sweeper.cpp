#include "qdmag/sweeper.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "qdmag/errors.hpp"
#include "qdmag/parallel.hpp"
#include "qdmag/symmetry.hpp"

namespace qdmag {
namespace {

constexpr double kBlindnessTolerance = 1e-10;

void check_dots(int dots) {
  if (dots < 1 || dots > kMaxDots)
    throw std::invalid_argument("N out of supported range [1," + std::to_string(kMaxDots) + "]");
}

std::unique_ptr<BayesProblem> make_problem(int dots, const DotModel& model, const GaussianPrior& prior, double t,
                                           const SweepOptions& options) {
  return std::make_unique<BayesProblem>(model, prior, options.quad_nodes, t, dots);
}

SweepRecord make_record(int dots, const BayesProblem& problem, Strategy best) {
  const GaussianPrior& prior = problem.prior();
  SweepRecord rec;
  rec.t = problem.time();
  rec.ratio_opt = best.outcome.ratio;
  rec.spectrum = best.outcome.spectrum;
  rec.probabilities = best.outcome.probabilities;
  rec.iterations = best.iterations;
  rec.converged = best.converged;
  for (const Ansatz& a : sweep_ansatze(dots))
    rec.ansatz_ratios[a.label()] = problem.evaluate(ansatz(a, dots)).ratio;
  rec.state_fidelities = ansatz_fidelities(best.state);
  rec.regime = regime_label(rec.state_fidelities);

  const CVector& v = best.state.amplitudes();
  const MeanStates ms = problem.mean_states(CMatrix(v * v.adjoint()));
  const Eigen::Index d = v.size();
  rec.population_gain = basis_gain(CMatrix::Identity(d, d), ms.rho_bar, ms.rho_bar_prime, prior).gain;
  if (prior.B0 == 0.0 && rec.population_gain > kBlindnessTolerance * prior.variance())
    throw InvariantViolation("sweep: populations carry information at B0 = 0 (gain " +
                             std::to_string(rec.population_gain / prior.variance()) + " dB^2)");
  rec.state = std::move(best.state);
  return rec;
}

OptimizerConfig point_config(const SweepOptions& options, std::uint64_t stream) {
  OptimizerConfig cfg = options.optimizer;
  cfg.seed = derive_seed(options.optimizer.seed, stream, 1);
  return cfg;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double sup_jump(const RVector& a, const RVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("detect_transitions: spectra of different sizes");
  return (a - b).cwiseAbs().maxCoeff();
}

double second_difference(const RVector& lo, const RVector& mid, const RVector& hi) {
  return (hi - 2.0 * mid + lo).cwiseAbs().maxCoeff();
}

double grid_coordinate(double t, bool log_grid) { return log_grid ? std::log(t) : t; }

double grid_midpoint(double a, double b, bool log_grid) { return log_grid ? std::sqrt(a * b) : 0.5 * (a + b); }

void check_grid(std::span<const SweepRecord> records, bool log_grid) {
  std::vector<double> steps;
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    if (log_grid && !(records[i].t > 0.0))
      throw std::invalid_argument("detect_transitions: log grid needs t > 0");
    steps.push_back(grid_coordinate(records[i + 1].t, log_grid) - grid_coordinate(records[i].t, log_grid));
  }
  const double h = steps.front();
  for (double s : steps)
    if (!(h > 0.0) || std::abs(s - h) > 1e-6 * h)
      throw std::invalid_argument(std::string("detect_transitions: grid is not ") +
                                  (log_grid ? "log-uniform" : "uniform"));
}

bool needs_refinement(double lo, double hi, const TransitionConfig& cfg) {
  return hi - lo > cfg.bracket_rel * std::max(lo, 1e-300);
}

void refine_zeroth(TransitionEvent& ev, SweepRecord lo, SweepRecord hi, const TransitionConfig& cfg,
                   const RecordEvaluator& evaluate) {
  for (int iter = 0; iter < 64 && needs_refinement(lo.t, hi.t, cfg); ++iter) {
    const double tm = grid_midpoint(lo.t, hi.t, cfg.log_grid);
    const PureState warm[] = {lo.state, hi.state};
    SweepRecord mid = evaluate(tm, warm);
    if (symmetric_overlap(mid.state, lo.state) >= symmetric_overlap(mid.state, hi.state))
      lo = std::move(mid);
    else
      hi = std::move(mid);
  }
  ev.t_lo = lo.t;
  ev.t_hi = hi.t;
  ev.spectrum_jump = sup_jump(hi.spectrum, lo.spectrum);
  ev.state_overlap_drop = 1.0 - symmetric_overlap(lo.state, hi.state);
}

void refine_first(TransitionEvent& ev, SweepRecord a, SweepRecord b, SweepRecord c, const TransitionConfig& cfg,
                  const RecordEvaluator& evaluate) {
  for (int iter = 0; iter < 64 && needs_refinement(a.t, c.t, cfg); ++iter) {
    const PureState warm_ab[] = {a.state, b.state};
    const PureState warm_bc[] = {b.state, c.state};
    SweepRecord m1 = evaluate(grid_midpoint(a.t, b.t, cfg.log_grid), warm_ab);
    SweepRecord m2 = evaluate(grid_midpoint(b.t, c.t, cfg.log_grid), warm_bc);
    const double s1 = second_difference(a.spectrum, m1.spectrum, b.spectrum);
    const double s2 = second_difference(m1.spectrum, b.spectrum, m2.spectrum);
    const double s3 = second_difference(b.spectrum, m2.spectrum, c.spectrum);
    if (s1 >= s2 && s1 >= s3) {
      c = std::move(b);
      b = std::move(m1);
    } else if (s3 > s2) {
      a = std::move(b);
      b = std::move(m2);
    } else {
      a = std::move(m1);
      c = std::move(m2);
    }
  }
  ev.t_lo = a.t;
  ev.t_hi = c.t;
  ev.spectrum_jump = sup_jump(c.spectrum, a.spectrum);
  ev.state_overlap_drop = 1.0 - symmetric_overlap(a.state, c.state);
}

}  // namespace

std::vector<double> time_grid(double start_ns, double end_ns, int points, bool log_spacing) {
  if (points < 2) throw std::invalid_argument("time_grid: need at least 2 points");
  if (!(start_ns >= 0.0) || !(end_ns > start_ns)) throw std::invalid_argument("time_grid: need 0 <= start < end");
  if (log_spacing && !(start_ns > 0.0)) throw std::invalid_argument("time_grid: log spacing needs start > 0");
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i) {
    const double u = static_cast<double>(i) / (points - 1);
    t[i] = log_spacing ? start_ns * std::pow(end_ns / start_ns, u) : start_ns + u * (end_ns - start_ns);
  }
  t.front() = start_ns;
  t.back() = end_ns;
  return t;
}

std::vector<Ansatz> sweep_ansatze(int dots) {
  check_dots(dots);
  std::vector<Ansatz> out{Ansatz::ghz(), Ansatz::plus_product()};
  for (int k = dots - 1; k >= 0; --k) out.push_back(Ansatz::mixed_product(k));
  return out;
}

SweepRecord sweep_point(int dots, const DotModel& model, const GaussianPrior& prior, double t,
                        const SweepOptions& options, std::span<const PureState> warm, std::uint64_t stream) {
  check_dots(dots);
  const auto problem = make_problem(dots, model, prior, t, options);
  return make_record(dots, *problem, optimize_state(dots, *problem, point_config(options, stream), warm));
}

std::vector<SweepRecord> time_sweep(int dots, const DotModel& model, const GaussianPrior& prior,
                                    std::span<const double> t_grid, const SweepOptions& options) {
  check_dots(dots);
  options.optimizer.validate();
  if (t_grid.empty()) throw std::invalid_argument("time_sweep: empty time grid");
  if (!(t_grid.front() >= 0.0)) throw std::invalid_argument("time_sweep: times must be >= 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("time_sweep: times must increase strictly");

  const std::size_t n = t_grid.size();
  const std::size_t total = 3 * n - 2;
  std::atomic<std::size_t> done{0};
  auto tick = [&] {
    const std::size_t k = ++done;
    if (options.progress) options.progress(k, total);
  };

  std::vector<std::unique_ptr<BayesProblem>> problems(n);
  std::vector<Strategy> best(n);
  const unsigned threads = std::max(1u, options.optimizer.threads);
  parallel_for(n, threads, [&](std::size_t k) {
    problems[k] = make_problem(dots, model, prior, t_grid[k], options);
    OptimizerConfig cfg = point_config(options, k);
    cfg.threads = 1;
    best[k] = optimize_state(dots, *problems[k], cfg);
    tick();
  });

  // Warm-started passes; on a tie within the solver tolerance the continued
  // branch wins so that degenerate optima do not flicker along the grid.
  auto carry = [&](std::size_t from, std::size_t to) {
    Strategy warm = refine_from(best[from].state, *problems[to], options.optimizer);
    const double slack = options.optimizer.tol * std::abs(best[to].outcome.ratio);
    if (warm.outcome.ratio <= best[to].outcome.ratio + slack) best[to] = std::move(warm);
    tick();
  };
  for (std::size_t k = 1; k < n; ++k) carry(k - 1, k);
  for (std::size_t k = n - 1; k-- > 0;) carry(k + 1, k);

  std::vector<SweepRecord> records(n);
  parallel_for(n, threads, [&](std::size_t k) { records[k] = make_record(dots, *problems[k], std::move(best[k])); });
  return records;
}

std::string to_string(TransitionKind kind) { return kind == TransitionKind::zeroth ? "zeroth" : "first"; }

std::vector<TransitionEvent> detect_transitions(std::span<const SweepRecord> records, const TransitionConfig& cfg,
                                                const RecordEvaluator& evaluate) {
  const std::size_t n = records.size();
  if (n < 5) throw std::invalid_argument("detect_transitions: need at least 5 records");
  check_grid(records, cfg.log_grid);

  const double h = grid_coordinate(records[1].t, cfg.log_grid) - grid_coordinate(records[0].t, cfg.log_grid);
  std::vector<double> jumps(n - 1), overlaps(n - 1), kinks(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    jumps[i] = sup_jump(records[i + 1].spectrum, records[i].spectrum);
    overlaps[i] = symmetric_overlap(records[i].state, records[i + 1].state);
  }
  for (std::size_t i = 1; i + 1 < n; ++i)
    kinks[i] = second_difference(records[i - 1].spectrum, records[i].spectrum, records[i + 1].spectrum) / (h * h);

  double scale = 1e-300;
  for (const auto& r : records) scale = std::max(scale, r.spectrum.cwiseAbs().maxCoeff());
  const double jump_floor = std::max(median(jumps), 1e-12 * scale);
  const double kink_floor =
      std::max(median(std::vector<double>(kinks.begin() + 1, kinks.end() - 1)), 1e-12 * scale / (h * h));

  std::vector<bool> zeroth(n - 1, false);
  for (std::size_t i = 0; i + 1 < n; ++i)
    zeroth[i] = jumps[i] > cfg.theta0 * jump_floor && overlaps[i] < cfg.overlap;
  auto near_zeroth = [&](std::size_t i) {
    for (std::size_t j = i >= 2 ? i - 2 : 0; j <= std::min(i + 1, n - 2); ++j)
      if (zeroth[j]) return true;
    return false;
  };

  std::vector<TransitionEvent> events;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (zeroth[i]) {
      TransitionEvent ev{records[i].t, records[i + 1].t, TransitionKind::zeroth, jumps[i], kinks[i] / kink_floor,
                         1.0 - overlaps[i]};
      if (evaluate) refine_zeroth(ev, records[i], records[i + 1], cfg, evaluate);
      events.push_back(ev);
      continue;
    }
    if (i == 0) continue;
    const bool kink = kinks[i] > cfg.theta1 * kink_floor && overlaps[i - 1] >= cfg.overlap &&
                      overlaps[i] >= cfg.overlap && !near_zeroth(i);
    if (!kink) continue;
    // A run of flagged points is one event centered on its sharpest point.
    std::size_t last = i, peak = i;
    while (last + 2 < n && !zeroth[last + 1] && kinks[last + 1] > cfg.theta1 * kink_floor &&
           overlaps[last + 1] >= cfg.overlap && !near_zeroth(last + 1)) {
      ++last;
      if (kinks[last] > kinks[peak]) peak = last;
    }
    TransitionEvent ev{records[i - 1].t,
                       records[last + 1].t,
                       TransitionKind::first,
                       sup_jump(records[last + 1].spectrum, records[i - 1].spectrum),
                       kinks[peak] / kink_floor,
                       1.0 - symmetric_overlap(records[i - 1].state, records[last + 1].state)};
    if (evaluate) refine_first(ev, records[peak - 1], records[peak], records[peak + 1], cfg, evaluate);
    events.push_back(ev);
    i = last;
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.t_lo < b.t_lo; });
  return events;
}

std::vector<NComparisonRow> n_comparison(std::span<const int> dots_list, const DotModel& model,
                                         const GaussianPrior& prior, std::span<const double> t_grid,
                                         const SweepOptions& options) {
  std::vector<NComparisonRow> rows;
  for (int dots : dots_list) {
    const auto records = time_sweep(dots, model, prior, t_grid, options);
    NComparisonRow row{dots, records.front().t, records.front().ratio_opt, records.front().t,
                       records.front().ansatz_ratios.at("ghz")};
    for (const auto& r : records) {
      if (r.ratio_opt < row.min_ratio) {
        row.min_ratio = r.ratio_opt;
        row.t_star = r.t;
      }
      const double g = r.ansatz_ratios.at("ghz");
      if (g < row.min_ratio_ghz) {
        row.min_ratio_ghz = g;
        row.t_ghz = r.t;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<PriorScanRow> prior_scan(std::span<const int> dots_list, const DotModel& model,
                                     std::span<const GaussianPrior> priors, std::span<const double> t_grid,
                                     const SweepOptions& options) {
  if (priors.empty()) throw std::invalid_argument("prior_scan: no priors");
  std::vector<PriorScanRow> rows;
  for (const auto& prior : priors) {
    for (int dots : dots_list) {
      const auto records = time_sweep(dots, model, prior, t_grid, options);
      const auto best = std::min_element(records.begin(), records.end(),
                                         [](const auto& a, const auto& b) { return a.ratio_opt < b.ratio_opt; });
      PriorScanRow row{dots, prior.B0, prior.dB, best->t, best->ratio_opt, 0.0};
      const double rate = dots * std::abs(larmor_omega(1.0, model.g_factor)) * best->t;
      row.van_trees_ratio =
          van_trees_bound(best->state, model, best->t, prior, prior_quadrature(prior, options.quad_nodes, rate)) /
          prior.variance();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace qdmag
