#include "qdmag/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qdmag/errors.hpp"
#include "qdmag/parallel.hpp"

namespace qdmag {
namespace {

void check_dots(int dots) {
  if (dots < 1 || dots > kMaxDots)
    throw std::invalid_argument("N out of supported range [1," + std::to_string(kMaxDots) + "]");
}

CVector qubit_plus() { return CVector::Constant(2, Complex(std::numbers::sqrt2 / 2.0)); }

CVector product_of(const CVector& factor, int copies) {
  std::vector<CVector> factors(copies, factor);
  return tensor_vectors(factors);
}

CVector ghz_vector(int dots) {
  const Eigen::Index d = Eigen::Index{1} << dots;
  CVector v = CVector::Zero(d);
  v(0) = v(d - 1) = std::numbers::sqrt2 / 2.0;
  return v;
}

std::string format_g(double g) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, g);
  return std::string(buf, res.ptr);
}

bool better(const Strategy& candidate, const Strategy& incumbent) {
  return candidate.outcome.ratio < incumbent.outcome.ratio;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("OptimizerConfig: tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("OptimizerConfig: max_iter must be >= 1");
}

std::string Ansatz::label() const {
  switch (kind) {
    case AnsatzKind::ghz:
      return "ghz";
    case AnsatzKind::plus_product:
      return "plus_product";
    case AnsatzKind::mixed_product:
      return "mixed_product(" + std::to_string(plus_count) + ")";
    case AnsatzKind::ghz_plus:
      return "ghz_plus(" + format_g(g) + ")";
  }
  return "unknown";
}

Ansatz Ansatz::parse(const std::string& label) {
  if (label == "ghz") return ghz();
  if (label == "plus_product") return plus_product();
  auto argument = [&](const std::string& prefix) -> std::string {
    if (label.rfind(prefix, 0) != 0 || label.back() != ')') throw std::invalid_argument("unknown ansatz " + label);
    return label.substr(prefix.size(), label.size() - prefix.size() - 1);
  };
  if (label.rfind("mixed_product(", 0) == 0) return mixed_product(std::stoi(argument("mixed_product(")));
  if (label.rfind("ghz_plus(", 0) == 0) return ghz_plus(std::stod(argument("ghz_plus(")));
  throw std::invalid_argument("unknown ansatz '" + label + "'");
}

PureState ansatz(const Ansatz& a, int dots) {
  check_dots(dots);
  switch (a.kind) {
    case AnsatzKind::ghz:
      return PureState::normalized(ghz_vector(dots));
    case AnsatzKind::plus_product:
      return PureState::normalized(product_of(qubit_plus(), dots));
    case AnsatzKind::mixed_product: {
      if (a.plus_count < 0 || a.plus_count > dots)
        throw std::invalid_argument("mixed_product: k must lie in [0, N]");
      std::vector<CVector> factors;
      for (int q = 0; q < dots; ++q) factors.push_back(q < a.plus_count ? qubit_plus() : basis_vector(2, 0));
      return PureState::normalized(tensor_vectors(factors));
    }
    case AnsatzKind::ghz_plus: {
      if (!(a.g >= 0.0 && a.g <= 1.0)) throw std::invalid_argument("ghz_plus: g must lie in [0, 1]");
      return PureState::normalized(a.g * ghz_vector(dots) + (1.0 - a.g) * product_of(qubit_plus(), dots));
    }
  }
  throw std::invalid_argument("ansatz: unknown kind");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ stream) ^ (substream * 0xd1b54a32d192ed03ULL));
}

PureState haar_random_state(Eigen::Index dim, std::mt19937_64& rng) {
  if (dim < 2) throw std::invalid_argument("haar_random_state: dim must be >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return PureState::normalized(v);
}

namespace {

// Lowest eigenvector of the iteration matrix. A spectrum that is flat to
// rounding (t = 0, where the matrix vanishes) carries no preference and
// yields |0...0>.
PureState lowest_state(const BayesProblem& problem, const CMatrix& l_centered) {
  const EigenSystem es = herm_eig(problem.iteration_matrix(l_centered));
  const Eigen::Index d = es.values.size();
  if (es.values(d - 1) - es.values(0) <= 1e-12 * problem.prior().variance()) return PureState(basis_vector(d, 0));
  return PureState::normalized(es.vectors.col(0));
}

}  // namespace

PureState iterate_once(const PureState& psi, const BayesProblem& problem) {
  return lowest_state(problem, problem.evaluate(psi).L_centered);
}

Strategy refine_from(const PureState& start, const BayesProblem& problem, const OptimizerConfig& cfg,
                     std::vector<double>* trace) {
  cfg.validate();
  Strategy current{start, problem.evaluate(start), "optimal", 0, false};
  if (trace) trace->push_back(current.outcome.ratio);
  Strategy best = current;

  int quiet = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    PureState next = lowest_state(problem, current.outcome.L_centered);
    EstimationOutcome outcome = problem.evaluate(next);
    if (trace) trace->push_back(outcome.ratio);

    const double change = std::abs(outcome.ratio - current.outcome.ratio) /
                          std::max(std::abs(current.outcome.ratio), std::numeric_limits<double>::min());
    current = Strategy{std::move(next), std::move(outcome), "optimal", it, false};
    if (better(current, best) || it == 1) best = current;
    best.iterations = it;

    quiet = change < cfg.tol ? quiet + 1 : 0;
    if (quiet >= 2) {
      best.converged = true;
      break;
    }
  }
  return best;
}

Strategy optimize_state(int dots, const BayesProblem& problem, const OptimizerConfig& cfg,
                        std::span<const PureState> warm_starts) {
  check_dots(dots);
  cfg.validate();
  const Eigen::Index dim = Eigen::Index{1} << dots;
  for (const auto& w : warm_starts)
    if (w.dim() != dim) throw std::invalid_argument("optimize_state: warm start has the wrong dimension");

  const std::size_t runs = warm_starts.size() + static_cast<std::size_t>(cfg.restarts);
  std::vector<Strategy> results(runs);
  parallel_for(runs, cfg.threads, [&](std::size_t r) {
    PureState start;
    if (r < warm_starts.size()) {
      start = warm_starts[r];
    } else {
      std::mt19937_64 rng(derive_seed(cfg.seed, r - warm_starts.size()));
      start = haar_random_state(dim, rng);
    }
    results[r] = refine_from(start, problem, cfg);
  });

  // Single reducer: minimum ratio, earliest run on ties.
  std::size_t winner = 0;
  for (std::size_t r = 1; r < runs; ++r)
    if (better(results[r], results[winner])) winner = r;
  Strategy out = std::move(results[winner]);
  out.label = "optimal";
  return out;
}

Strategy optimize_state(int dots, const DotModel& model, double t, const GaussianPrior& prior,
                        const OptimizerConfig& cfg, int quad_nodes) {
  return optimize_state(dots, BayesProblem(model, prior, quad_nodes, t, dots), cfg);
}

Strategy evaluate_fixed_state(const PureState& psi, const BayesProblem& problem, std::string label) {
  return Strategy{psi, problem.evaluate(psi), std::move(label), 0, true};
}

Strategy scan_ghz_plus(int dots, const BayesProblem& problem, std::span<const double> g_grid) {
  check_dots(dots);
  if (g_grid.empty()) throw std::invalid_argument("scan_ghz_plus: empty g grid");
  for (double g : g_grid)
    if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("scan_ghz_plus: g outside [0, 1]");

  std::vector<double> grid(g_grid.begin(), g_grid.end());
  std::sort(grid.begin(), grid.end());
  auto ratio_at = [&](double g) { return problem.evaluate(ansatz(Ansatz::ghz_plus(g), dots)).ratio; };

  std::size_t best = 0;
  std::vector<double> ratios(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ratios[i] = ratio_at(grid[i]);
    if (ratios[i] < ratios[best]) best = i;
  }
  double best_g = grid[best];
  double best_ratio = ratios[best];

  if (grid.size() > 1) {
    double lo = grid[best == 0 ? 0 : best - 1];
    double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = ratio_at(x1), f2 = ratio_at(x2);
    while (hi - lo > 1e-4) {
      if (f1 > f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = ratio_at(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = ratio_at(x1);
      }
    }
    const double g = 0.5 * (lo + hi);
    const double r = ratio_at(g);
    if (r < best_ratio) {
      best_ratio = r;
      best_g = g;
    }
  }
  const Ansatz winner = Ansatz::ghz_plus(best_g);
  return evaluate_fixed_state(ansatz(winner, dots), problem, winner.label());
}

Strategy random_product_baseline(int dots, const BayesProblem& problem, int samples, std::uint64_t seed) {
  check_dots(dots);
  if (samples < 1) throw std::invalid_argument("random_product_baseline: samples must be >= 1");
  std::mt19937_64 rng(seed);
  Strategy best;
  for (int s = 0; s < samples; ++s) {
    std::vector<CVector> factors;
    for (int q = 0; q < dots; ++q) factors.push_back(haar_random_state(2, rng).amplitudes());
    const PureState psi = PureState::normalized(tensor_vectors(factors));
    Strategy candidate = evaluate_fixed_state(psi, problem, "product_baseline");
    if (s == 0 || better(candidate, best)) best = std::move(candidate);
  }
  return best;
}

}  // namespace qdmag
