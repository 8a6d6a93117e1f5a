#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>

#include "output.hpp"
#include "qdmag/sweeper.hpp"
#include "qdmag/symmetry.hpp"

namespace qdmag::cli {
namespace {

constexpr double kTesla = 1e-3;  // per mT

class Progress {
 public:
  Progress(std::string label, bool quiet) : label_(std::move(label)), quiet_(quiet) {}
  void operator()(std::size_t done, std::size_t total) {
    if (quiet_ || total == 0) return;
    const int percent = static_cast<int>(100 * done / total);
    if (percent < next_ && done != total) return;
    std::cerr << label_ << ": " << done << "/" << total << " (" << percent << "%)\n";
    next_ = percent + 10;
  }

 private:
  std::string label_;
  bool quiet_;
  int next_ = 0;
};

GaussianPrior prior_of(const RunConfig& c) { return GaussianPrior(c.prior.B0_mT * kTesla, c.prior.dB_mT * kTesla); }

SweepOptions sweep_options(const RunConfig& c, int dots, const RunOptions& options) {
  SweepOptions s;
  s.optimizer.restarts = c.restarts_for(dots);
  s.optimizer.tol = c.sim.tol;
  s.optimizer.max_iter = c.sim.max_iter;
  s.optimizer.seed = c.sim.seed;
  s.optimizer.threads = options.threads;
  s.quad_nodes = c.sim.quad_nodes;
  return s;
}

std::vector<double> grid_of(const RunConfig& c) {
  return time_grid(c.sweep.t_start_ns, c.sweep.t_end_ns, c.sweep.points, c.sweep.log_spacing);
}

// Column tag of |+>^k |0>^(N-k): "plus" per |+> qubit, "0" per |0> qubit.
std::string product_tag(int plus, int dots) {
  std::string tag;
  for (int q = 0; q < plus; ++q) tag += "plus";
  return tag + std::string(dots - plus, '0');
}

std::vector<std::pair<std::string, std::string>> ansatz_columns(int dots) {
  std::vector<std::pair<std::string, std::string>> cols{{"ratio_ghz", "ghz"}, {"ratio_plus", "plus_product"}};
  for (int k = dots - 1; k >= 0; --k)
    cols.push_back({"ratio_" + product_tag(k, dots), Ansatz::mixed_product(k).label()});
  return cols;
}

void warn_validity(const RunConfig& c, double t_max, RunRecord& record) {
  const double limit = box_model_validity_ns(c.to_material());
  if (t_max > 0.25 * limit) {
    const std::string msg = "times up to " + fmt(t_max) + " ns are not small against the box-model limit " +
                            fmt(limit) + " ns";
    std::cerr << "warning: " << msg << "\n";
    record.warnings.push_back(msg);
  }
}

CsvTable sweep_table(int dots, const std::vector<SweepRecord>& records) {
  const int d = 1 << dots;
  std::vector<std::string> header{"t_ns", "ratio_opt"};
  const auto cols = ansatz_columns(dots);
  for (const auto& c : cols) header.push_back(c.first);
  for (int k = 1; k <= d; ++k) header.push_back("lambda_" + std::to_string(k));
  for (int k = 1; k <= d; ++k) header.push_back("p_" + std::to_string(k));
  header.push_back("regime");
  CsvTable table(header);
  for (const auto& r : records) {
    std::vector<std::string> row{fmt(r.t), fmt(r.ratio_opt)};
    for (const auto& c : cols) row.push_back(fmt(r.ansatz_ratios.at(c.second)));
    for (int k = 0; k < d; ++k) row.push_back(fmt(r.spectrum(k) / kTesla));
    for (int k = 0; k < d; ++k) row.push_back(fmt(r.probabilities(k)));
    row.push_back(r.regime);
    table.add_row(std::move(row));
  }
  return table;
}

int finish(const std::filesystem::path& dir, RunRecord& record,
           const std::vector<std::pair<std::string, CsvTable>>& tables) {
  for (const auto& [name, table] : tables) record.outputs.push_back({name, write_file(dir, name, table.text())});
  write_sidecar(dir, record);
  return 0;
}

int bath_table(const RunConfig& c, const RunOptions& o, RunRecord& record) {
  const HalfInt s = HalfInt::from_double(c.material.bath_spin_s);
  const Multiplicities counts = multiplicity_table(c.sim.n_bath, s);
  const BigInt total = boost::multiprecision::pow(BigInt(s.twice + 1), static_cast<unsigned>(c.sim.n_bath));
  CsvTable table({"K", "count", "P_K"});
  for (const auto& [K, count] : counts) {
    const double p = static_cast<double>(boost::multiprecision::cpp_rational(count, total));
    table.add_row({fmt(K.value()), count.str(), fmt(p)});
  }
  return finish(o.out_dir, record, {{"bath_table.csv", table}});
}

int channel_curves(const RunConfig& c, const RunOptions& o, RunRecord& record) {
  const DotModel model = model_of_config(c);
  const auto grid = grid_of(c);
  warn_validity(c, grid.back(), record);
  CsvTable table({"t_ns", "B_mT", "A", "re_E", "im_E", "abs_E"});
  Progress progress("channel-curves", o.quiet);
  std::size_t done = 0;
  for (double b_mT : c.channel.B_mT_list) {
    const ChannelEvaluator eval(model.bath, b_mT * kTesla, model.g_factor);
    for (double t : grid) {
      const ChannelCoeffs k = eval.at(t);
      check_coefficients(k);
      table.add_row({fmt(t), fmt(b_mT), fmt(k.A), fmt(k.E.real()), fmt(k.E.imag()), fmt(std::abs(k.E))});
    }
    progress(++done, c.channel.B_mT_list.size());
  }
  return finish(o.out_dir, record, {{"channel_curves.csv", table}});
}

int sweep(const RunConfig& c, const RunOptions& o, RunRecord& record, bool with_transitions) {
  const DotModel model = model_of_config(c);
  const GaussianPrior prior = prior_of(c);
  const auto grid = grid_of(c);
  warn_validity(c, grid.back(), record);
  SweepOptions options = sweep_options(c, c.dots, o);
  Progress progress(with_transitions ? "transitions" : "sweep", o.quiet);
  options.progress = std::ref(progress);
  const auto records = time_sweep(c.dots, model, prior, grid, options);
  std::vector<std::pair<std::string, CsvTable>> tables{{"sweep.csv", sweep_table(c.dots, records)}};

  if (with_transitions) {
    TransitionConfig tc;
    tc.theta0 = c.transitions.theta0;
    tc.theta1 = c.transitions.theta1;
    tc.overlap = c.transitions.overlap;
    tc.bracket_rel = c.transitions.bracket_rel;
    tc.log_grid = c.sweep.log_spacing;
    SweepOptions point = options;
    point.progress = nullptr;
    std::uint64_t stream = 1u << 20;
    const auto events = detect_transitions(records, tc, [&](double t, std::span<const PureState> warm) {
      return sweep_point(c.dots, model, prior, t, point, warm, stream++);
    });
    CsvTable table({"kind", "t_lo_ns", "t_hi_ns", "spectrum_jump_mT", "kink_score", "state_overlap_drop"});
    for (const auto& e : events)
      table.add_row({to_string(e.kind), fmt(e.t_lo), fmt(e.t_hi), fmt(e.spectrum_jump / kTesla), fmt(e.kink_score),
                     fmt(e.state_overlap_drop)});
    if (!o.quiet) std::cerr << "transitions: " << events.size() << " events\n";
    tables.push_back({"transitions.csv", table});
  }
  return finish(o.out_dir, record, tables);
}

int optimize(const RunConfig& c, const RunOptions& o, RunRecord& record) {
  const DotModel model = model_of_config(c);
  const GaussianPrior prior = prior_of(c);
  warn_validity(c, c.optimize.t_ns, record);
  const int dots = c.dots;
  const int d = 1 << dots;
  const SweepOptions options = sweep_options(c, dots, o);
  const SweepRecord r = sweep_point(dots, model, prior, c.optimize.t_ns, options);

  std::vector<std::string> header{"t_ns", "ratio_opt", "iterations", "converged", "regime"};
  const auto cols = ansatz_columns(dots);
  for (const auto& col : cols) header.push_back(col.first);
  header.insert(header.end(), {"ratio_ghz_plus", "g_ghz_plus"});
  for (int k = 1; k <= d; ++k) header.push_back("lambda_" + std::to_string(k));
  for (int k = 1; k <= d; ++k) header.push_back("p_" + std::to_string(k));
  for (int k = 0; k < d; ++k) {
    header.push_back("re_psi_" + std::to_string(k));
    header.push_back("im_psi_" + std::to_string(k));
  }
  CsvTable table(header);

  const BayesProblem problem(model, prior, c.sim.quad_nodes, c.optimize.t_ns, dots);
  std::vector<double> g_grid(21);
  for (int i = 0; i <= 20; ++i) g_grid[i] = i / 20.0;
  const Strategy family = scan_ghz_plus(dots, problem, g_grid);
  const double g = Ansatz::parse(family.label).g;

  std::vector<std::string> row{fmt(r.t), fmt(r.ratio_opt), std::to_string(r.iterations),
                               r.converged ? "1" : "0", r.regime};
  for (const auto& col : cols) row.push_back(fmt(r.ansatz_ratios.at(col.second)));
  row.push_back(fmt(family.outcome.ratio));
  row.push_back(fmt(g));
  for (int k = 0; k < d; ++k) row.push_back(fmt(r.spectrum(k) / kTesla));
  for (int k = 0; k < d; ++k) row.push_back(fmt(r.probabilities(k)));
  for (int k = 0; k < d; ++k) {
    row.push_back(fmt(r.state.amplitudes()(k).real()));
    row.push_back(fmt(r.state.amplitudes()(k).imag()));
  }
  table.add_row(std::move(row));
  return finish(o.out_dir, record, {{"optimize.csv", table}});
}

int compare_n(const RunConfig& c, const RunOptions& o, RunRecord& record) {
  const DotModel model = model_of_config(c);
  const GaussianPrior prior = prior_of(c);
  const auto grid = grid_of(c);
  warn_validity(c, grid.back(), record);
  CsvTable table({"N", "t_star_ns", "min_ratio", "t_ghz_ns", "min_ratio_ghz", "product_baseline_ratio"});
  for (int dots : c.scan.dots_list) {
    SweepOptions options = sweep_options(c, dots, o);
    Progress progress("compare-n N=" + std::to_string(dots), o.quiet);
    options.progress = std::ref(progress);
    const int list[] = {dots};
    const NComparisonRow row = n_comparison(list, model, prior, grid, options).front();
    const BayesProblem problem(model, prior, c.sim.quad_nodes, row.t_star, dots);
    const Strategy baseline =
        random_product_baseline(dots, problem, c.scan.product_samples, derive_seed(c.sim.seed, dots, 7));
    table.add_row({std::to_string(dots), fmt(row.t_star), fmt(row.min_ratio), fmt(row.t_ghz), fmt(row.min_ratio_ghz),
                   fmt(baseline.outcome.ratio)});
  }
  return finish(o.out_dir, record, {{"compare_n.csv", table}});
}

int prior_scan_cmd(const RunConfig& c, const RunOptions& o, RunRecord& record) {
  const DotModel model = model_of_config(c);
  const auto grid = grid_of(c);
  warn_validity(c, grid.back(), record);
  std::vector<GaussianPrior> priors;
  for (double b0 : c.scan.B0_mT_list)
    for (double db : c.scan.dB_mT_list) priors.emplace_back(b0 * kTesla, db * kTesla);
  CsvTable table({"N", "B0_mT", "dB_mT", "t_star_ns", "min_ratio", "van_trees_ratio"});
  for (const auto& prior : priors) {
    for (int dots : c.scan.dots_list) {
      SweepOptions options = sweep_options(c, dots, o);
      Progress progress("prior-scan N=" + std::to_string(dots) + " B0=" + fmt(prior.B0 / kTesla) +
                            " mT dB=" + fmt(prior.dB / kTesla) + " mT",
                        o.quiet);
      options.progress = std::ref(progress);
      const int list[] = {dots};
      const GaussianPrior one[] = {prior};
      const PriorScanRow row = prior_scan(list, model, one, grid, options).front();
      table.add_row({std::to_string(dots), fmt(row.B0 / kTesla), fmt(row.dB / kTesla), fmt(row.t_star),
                     fmt(row.min_ratio), fmt(row.van_trees_ratio)});
    }
  }
  return finish(o.out_dir, record, {{"prior_scan.csv", table}});
}

int validate(const RunConfig& c, const RunOptions& o, RunRecord& record) {
  const auto results = run_validation(c, o);
  CsvTable table({"check", "status", "seconds", "detail"});
  bool all = true;
  std::size_t width = 5;
  for (const auto& r : results) width = std::max(width, r.name.size());
  std::cout << std::left << std::setw(static_cast<int>(width) + 2) << "check"
            << "status  detail\n";
  for (const auto& r : results) {
    all = all && r.pass;
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << r.name << (r.pass ? "PASS    " : "FAIL    ")
              << r.detail << "\n";
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    table.add_row({r.name, r.pass ? "PASS" : "FAIL", fmt(r.seconds), detail});
  }
  finish(o.out_dir, record, {{"validate.csv", table}});
  return all ? 0 : 1;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, const RunOptions& options) {
  RunRecord record;
  record.command = command;
  record.config = &config;
  record.threads = options.threads;
  if (command == "bath-table") return bath_table(config, options, record);
  if (command == "channel-curves") return channel_curves(config, options, record);
  if (command == "sweep") return sweep(config, options, record, false);
  if (command == "transitions") return sweep(config, options, record, true);
  if (command == "optimize") return optimize(config, options, record);
  if (command == "compare-n") return compare_n(config, options, record);
  if (command == "prior-scan") return prior_scan_cmd(config, options, record);
  if (command == "validate") return validate(config, options, record);
  throw std::invalid_argument("unknown command '" + command + "'");
}

}  // namespace qdmag::cli
