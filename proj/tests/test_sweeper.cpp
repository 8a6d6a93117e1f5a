#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "qdmag/errors.hpp"
#include "qdmag/sweeper.hpp"

using namespace qdmag;

namespace {

DotModel default_model() { return make_dot_model(Material{}, AlphaMode::variance_matched, 49); }
const GaussianPrior kPrior(7e-3, 4e-3);

SweepOptions quick_options() {
  SweepOptions o;
  o.optimizer.restarts = 4;
  return o;
}

const PureState kPlus = PureState::normalized(CVector::Constant(2, 1.0));
const PureState kZero(basis_vector(2, 0));

// Two-level spectrum +-f(t) on a log grid with a fixed optimal state.
std::vector<SweepRecord> synthetic(const std::vector<double>& t, auto f, auto state_at) {
  std::vector<SweepRecord> out;
  for (double ti : t) {
    SweepRecord r;
    r.t = ti;
    r.spectrum = RVector(2);
    r.spectrum << -f(ti), f(ti);
    r.state = state_at(ti);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(TimeGrid, Spacing) {
  const auto lin = time_grid(0.0, 10.0, 11, false);
  ASSERT_EQ(lin.size(), 11u);
  EXPECT_EQ(lin.front(), 0.0);
  EXPECT_NEAR(lin[3], 3.0, 1e-14);
  EXPECT_EQ(lin.back(), 10.0);

  const auto lg = time_grid(0.1, 1000.0, 5, true);
  EXPECT_EQ(lg.front(), 0.1);
  EXPECT_NEAR(lg[1], 1.0, 1e-13);
  EXPECT_NEAR(lg[2], 10.0, 1e-12);
  EXPECT_EQ(lg.back(), 1000.0);
  EXPECT_THROW(time_grid(0.0, 10.0, 5, true), std::invalid_argument);
}

TEST(SweepAnsatze, Family) {
  std::vector<std::string> labels;
  for (const Ansatz& a : sweep_ansatze(2)) labels.push_back(a.label());
  EXPECT_EQ(labels, (std::vector<std::string>{"ghz", "plus_product", "mixed_product(1)", "mixed_product(0)"}));
  EXPECT_THROW(sweep_ansatze(kMaxDots + 1), std::invalid_argument);
}

TEST(TimeSweep, FirstRecordAtZeroTime) {
  const auto t = time_grid(0.0, 12.0, 5, false);
  const auto records = time_sweep(2, default_model(), kPrior, t, quick_options());
  ASSERT_EQ(records.size(), 5u);
  EXPECT_NEAR(records.front().ratio_opt, 1.0, 1e-9);
  for (const auto& [label, ratio] : records.front().ansatz_ratios) EXPECT_NEAR(ratio, 1.0, 1e-9) << label;
}

TEST(TimeSweep, RecordInvariants) {
  const auto t = time_grid(0.5, 60.0, 8, true);
  std::size_t calls = 0, last_total = 0;
  SweepOptions o = quick_options();
  o.progress = [&](std::size_t, std::size_t total) {
    ++calls;
    last_total = total;
  };
  const auto records = time_sweep(2, default_model(), kPrior, t, o);
  EXPECT_EQ(calls, 3 * t.size() - 2);
  EXPECT_EQ(last_total, 3 * t.size() - 2);
  for (const auto& r : records) {
    EXPECT_GE(r.ratio_opt, 0.0);
    EXPECT_LE(r.ratio_opt, 1.0 + 1e-10);
    for (const auto& [label, ratio] : r.ansatz_ratios) EXPECT_LE(r.ratio_opt, ratio + 1e-8) << label;
    EXPECT_NEAR(r.probabilities.sum(), 1.0, 1e-10);
    for (Eigen::Index k = 1; k < r.spectrum.size(); ++k) EXPECT_LE(r.spectrum(k - 1), r.spectrum(k));
    EXPECT_FALSE(r.regime.empty());
  }
}

TEST(TimeSweep, Deterministic) {
  const auto t = time_grid(1.0, 30.0, 6, true);
  SweepOptions threaded = quick_options();
  threaded.optimizer.threads = 3;
  const auto a = time_sweep(1, default_model(), kPrior, t, quick_options());
  const auto b = time_sweep(1, default_model(), kPrior, t, threaded);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ratio_opt, b[i].ratio_opt);
    EXPECT_EQ(a[i].state.amplitudes(), b[i].state.amplitudes());
  }
}

TEST(TimeSweep, RejectsBadGrids) {
  const std::vector<double> decreasing{1.0, 0.5};
  EXPECT_THROW(time_sweep(1, default_model(), kPrior, decreasing, quick_options()), std::invalid_argument);
  EXPECT_THROW(time_sweep(1, default_model(), kPrior, std::vector<double>{}, quick_options()), std::invalid_argument);
  EXPECT_THROW(time_sweep(1, default_model(), kPrior, std::vector<double>{-1.0}, quick_options()),
               std::invalid_argument);
}

TEST(TimeSweep, ZeroMeanFieldHidesPopulations) {
  const GaussianPrior centered(0.0, 1e-3);
  const auto t = time_grid(1.0, 300.0, 6, true);
  for (const auto& r : time_sweep(1, default_model(), centered, t, quick_options()))
    EXPECT_LT(r.population_gain, 1e-10 * centered.variance());
}

TEST(Transitions, SmoothDataHasNoEvents) {
  const auto t = time_grid(0.5, 50.0, 60, true);
  const auto records = synthetic(
      t, [](double x) { return 4e-3 * (1.0 - std::exp(-(x / 5.0) * (x / 5.0))); }, [](double) { return kPlus; });
  EXPECT_TRUE(detect_transitions(records, TransitionConfig{}).empty());
}

TEST(Transitions, SpectrumJumpWithStateChangeIsZerothKind) {
  const auto t = time_grid(1.0, 100.0, 41, true);
  const auto records = synthetic(
      t, [](double x) { return 1e-3 * std::log(x) + (x > 10.5 ? 2e-3 : 0.0); },
      [](double x) { return x > 10.5 ? kZero : kPlus; });
  const auto events = detect_transitions(records, TransitionConfig{});
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, TransitionKind::zeroth);
  EXPECT_LT(events[0].t_lo, 10.5);
  EXPECT_GT(events[0].t_hi, 10.5);
  EXPECT_NEAR(events[0].state_overlap_drop, 0.5, 1e-9);
}

TEST(Transitions, JumpWithoutStateChangeIsNotZeroth) {
  const auto t = time_grid(1.0, 100.0, 41, true);
  const auto records = synthetic(
      t, [](double x) { return 1e-3 * std::log(x) + (x > 10.5 ? 2e-3 : 0.0); }, [](double) { return kPlus; });
  for (const auto& ev : detect_transitions(records, TransitionConfig{})) EXPECT_NE(ev.kind, TransitionKind::zeroth);
}

TEST(Transitions, KinkIsFirstKind) {
  const auto t = time_grid(1.0, 100.0, 41, true);
  const double t0 = 9.0;
  const auto records = synthetic(
      t, [&](double x) { return 1e-3 * (std::log(x) + 3.0 * std::max(0.0, std::log(x / t0))); },
      [](double) { return kPlus; });
  const auto events = detect_transitions(records, TransitionConfig{});
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, TransitionKind::first);
  EXPECT_LE(events[0].t_lo, t0);
  EXPECT_GE(events[0].t_hi, t0);
}

TEST(Transitions, RefinementNarrowsBracket) {
  const auto t = time_grid(1.0, 100.0, 41, true);
  auto f = [](double x) { return 1e-3 * std::log(x) + (x > 10.5 ? 2e-3 : 0.0); };
  auto state = [](double x) { return x > 10.5 ? kZero : kPlus; };
  const auto records = synthetic(t, f, state);
  int calls = 0;
  const RecordEvaluator eval = [&](double x, std::span<const PureState>) {
    ++calls;
    return synthetic(std::vector<double>{x}, f, state).front();
  };
  TransitionConfig cfg;
  const auto events = detect_transitions(records, cfg, eval);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_GT(calls, 0);
  EXPECT_LE(events[0].t_hi - events[0].t_lo, cfg.bracket_rel * events[0].t_lo);
  EXPECT_LT(events[0].t_lo, 10.5);
  EXPECT_GT(events[0].t_hi, 10.5);
}

TEST(Transitions, GridValidation) {
  const auto few = synthetic(time_grid(1.0, 2.0, 4, true), [](double x) { return x; }, [](double) { return kPlus; });
  EXPECT_THROW(detect_transitions(few, TransitionConfig{}), std::invalid_argument);

  std::vector<double> t = time_grid(1.0, 10.0, 8, true);
  t[3] *= 1.1;
  const auto uneven = synthetic(t, [](double x) { return x; }, [](double) { return kPlus; });
  EXPECT_THROW(detect_transitions(uneven, TransitionConfig{}), std::invalid_argument);

  const auto linear = synthetic(time_grid(0.0, 10.0, 8, false), [](double x) { return x; }, [](double) { return kPlus; });
  EXPECT_THROW(detect_transitions(linear, TransitionConfig{}), std::invalid_argument);
  TransitionConfig lin_cfg;
  lin_cfg.log_grid = false;
  EXPECT_NO_THROW(detect_transitions(linear, lin_cfg));
}

TEST(NComparison, SingleDotRowMatchesSweep) {
  const auto t = time_grid(1.0, 40.0, 6, true);
  const std::vector<int> dots{1};
  const auto rows = n_comparison(dots, default_model(), kPrior, t, quick_options());
  const auto records = time_sweep(1, default_model(), kPrior, t, quick_options());
  double best = 1.0;
  for (const auto& r : records) best = std::min(best, r.ratio_opt);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].min_ratio, best);
}

TEST(PriorScan, DuplicatePriorsGiveIdenticalRows) {
  const auto t = time_grid(1.0, 40.0, 4, true);
  const std::vector<int> dots{1};
  const std::vector<GaussianPrior> priors{GaussianPrior(7e-3, 1e-3), GaussianPrior(7e-3, 1e-3)};
  const auto rows = prior_scan(dots, default_model(), priors, t, quick_options());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].min_ratio, rows[1].min_ratio);
  EXPECT_EQ(rows[0].t_star, rows[1].t_star);
  EXPECT_EQ(rows[0].van_trees_ratio, rows[1].van_trees_ratio);
  EXPECT_LE(rows[0].van_trees_ratio, rows[0].min_ratio + 1e-9);
  EXPECT_THROW(prior_scan(dots, default_model(), std::vector<GaussianPrior>{}, t, quick_options()),
               std::invalid_argument);
}
