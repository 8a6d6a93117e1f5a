#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "output.hpp"
#include "qdmag/sweeper.hpp"

namespace qdmag::cli {
namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

CheckResult timed(const std::string& name, const std::function<CheckResult()>& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

CheckResult multiplicities() {
  int mismatches = 0;
  for (int n = 1; n <= 40; ++n)
    if (multiplicity_table(n, HalfInt{1}) != multiplicity_oracle(n, HalfInt{1})) ++mismatches;
  for (int n = 1; n <= 20; ++n)
    if (multiplicity_table(n, HalfInt{3}) != multiplicity_oracle(n, HalfInt{3})) ++mismatches;
  return {"", mismatches == 0, std::to_string(mismatches) + " mismatching tables (s=1/2 n<=40; s=3/2 n<=20)"};
}

CheckResult channel_vs_exact(const RunConfig& c) {
  double worst_a = 0.0, worst_e = 0.0, worst_td = 0.0;
  const CVector plus = CVector::Constant(2, Complex(std::numbers::sqrt2 / 2));
  CVector iplus(2);
  iplus << Complex(std::numbers::sqrt2 / 2), Complex(0.0, std::numbers::sqrt2 / 2);
  const std::vector<CVector> inputs{basis_vector(2, 0), plus, iplus};
  for (int n = 2; n <= 4; ++n) {
    const DotModel model = make_dot_model(c.to_material(), c.sim.alpha_mode, n);
    for (double b_mT : {0.0, 1.0, 7.0, 50.0, 1000.0}) {
      const double b = b_mT * 1e-3;
      const ExactCentralSpin exact(n, b, model.bath.alpha, model.g_factor);
      for (int i = 0; i < 40; ++i) {
        const double t = 200.0 * i / 39.0;
        const ChannelCoeffs k = model.coefficients(b, t);
        const ExactChannelSample s = exact.sample(t);
        worst_a = std::max(worst_a, std::abs(k.A - s.A_exact));
        worst_e = std::max(worst_e, std::abs(std::abs(k.E) - std::abs(s.E_exact)));
        for (const auto& v : inputs) {
          const CMatrix rho = v * v.adjoint();
          CMatrix mapped = rho;
          apply_product_channel(mapped, k.A, k.E);
          worst_td = std::max(worst_td, trace_distance(DensityMatrix(hermitian_part(mapped)),
                                                       DensityMatrix(hermitian_part(exact.evolve(rho, t)))));
        }
      }
    }
  }
  const bool pass = worst_a < 1e-9 && worst_e < 1e-9 && worst_td < 1e-8;
  return {"", pass, "max |dA| " + sci(worst_a) + ", max d|E| " + sci(worst_e) + ", max trace distance " + sci(worst_td)};
}

CheckResult cptp_grid(const RunConfig& c) {
  const DotModel model = make_dot_model(c.to_material(), c.sim.alpha_mode, 49);
  double worst_complete = 0.0, min_choi = 1.0;
  for (int i = 0; i < 20; ++i) {
    const double b = 1.0 * i / 19.0;
    const ChannelEvaluator eval(model.bath, b, model.g_factor);
    for (int j = 0; j < 20; ++j) {
      const double t = 0.1 * std::pow(2000.0 / 0.1, j / 19.0);
      const KrausSet ks = kraus_set(eval.at(t));
      worst_complete = std::max(worst_complete, (ks.completeness() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(ks.choi(), Eigen::EigenvaluesOnly);
      min_choi = std::min(min_choi, es.eigenvalues().minCoeff());
    }
  }
  return {"", worst_complete < 1e-10 && min_choi >= -1e-10,
          "max completeness defect " + sci(worst_complete) + ", min Choi eigenvalue " + sci(min_choi)};
}

CheckResult personick_residuals() {
  std::mt19937_64 rng(derive_seed(0x9e50, 1));
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 << (trial % 3);
    CMatrix g(d, d), h(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        g(i, j) = Complex(normal(rng), normal(rng));
        h(i, j) = Complex(normal(rng), normal(rng));
      }
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    const CMatrix prime = hermitian_part(h) * 1e-3;
    const HermitianOperator L = personick_observable(rho, prime);
    const CMatrix residual = 0.5 * (L.matrix() * rho + rho * L.matrix()) - prime;
    worst = std::max(worst, max_abs(residual));
  }
  return {"", worst < 1e-9, "max residual " + sci(worst) + " over 50 random full-rank inputs"};
}

CheckResult van_trees(const RunConfig& c) {
  const DotModel model = model_of_config(c);
  const GaussianPrior prior(c.prior.B0_mT * 1e-3, c.prior.dB_mT * 1e-3);
  double worst = 1.0;
  for (int dots : {1, 2}) {
    OptimizerConfig cfg;
    cfg.restarts = 4;
    for (double t : {0.5, 3.0, 6.0, 20.0}) {
      const BayesProblem problem(model, prior, c.sim.quad_nodes, t, dots);
      const Strategy s = optimize_state(dots, problem, cfg);
      const double bound = van_trees_bound(s.state, model, t, prior, problem.grid());
      worst = std::min(worst, (s.outcome.var_est - bound) / prior.variance());
    }
  }
  return {"", worst >= -1e-9, "min (var_est - bound) / dB^2 = " + sci(worst)};
}

CheckResult readback(const RunConfig& c, const RunOptions& o) {
  RunConfig small = c;
  small.dots = 2;
  small.sweep = SweepConfig{0.5, 40.0, 12, true};
  small.sim.restarts = 4;
  RunOptions quiet = o;
  quiet.quiet = true;
  quiet.out_dir = o.out_dir / "validate_readback";
  run_command("sweep", small, quiet);
  const std::string first = read_csv(quiet.out_dir / "sweep.csv").text();
  run_command("sweep", small, quiet);
  const CsvTable table = read_csv(quiet.out_dir / "sweep.csv");
  const bool deterministic = table.text() == first;

  int bad = 0;
  const auto& h = table.header();
  for (const auto& row : table.rows()) {
    double ratio = 0.0, psum = 0.0, best_ansatz = 1.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i] == "regime" || h[i] == "t_ns") continue;
      const double v = std::stod(row[i]);
      if (h[i] == "ratio_opt") ratio = v;
      if (h[i].rfind("p_", 0) == 0) psum += v;
      if (h[i].rfind("ratio_", 0) == 0 && h[i] != "ratio_opt") best_ansatz = std::min(best_ansatz, v);
    }
    if (!(ratio >= 0.0 && ratio <= 1.0 + 1e-10) || std::abs(psum - 1.0) > 1e-9 || ratio > best_ansatz + 1e-8) ++bad;
  }
  return {"", bad == 0 && deterministic,
          std::to_string(table.rows().size()) + " rows read back, " + std::to_string(bad) + " violating; rerun " +
              (deterministic ? "byte-identical" : "DIFFERS")};
}

}  // namespace

DotModel model_of_config(const RunConfig& c) {
  return make_dot_model(c.to_material(), c.sim.alpha_mode, c.sim.n_bath);
}

std::vector<CheckResult> run_validation(const RunConfig& c, const RunOptions& o) {
  std::vector<CheckResult> out;
  out.push_back(timed("multiplicity_oracle", multiplicities));
  out.push_back(timed("channel_vs_exact", [&] { return channel_vs_exact(c); }));
  out.push_back(timed("cptp_grid", [&] { return cptp_grid(c); }));
  out.push_back(timed("personick_residuals", personick_residuals));
  out.push_back(timed("van_trees", [&] { return van_trees(c); }));
  out.push_back(timed("csv_readback", [&] { return readback(c, o); }));
  return out;
}

}  // namespace qdmag::cli
