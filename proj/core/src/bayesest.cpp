#include "qdmag/bayesest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qdmag/errors.hpp"

namespace qdmag {
namespace {

constexpr double kRatioTolerance = 1e-10;

// Physicists' Gauss-Hermite rule (weight e^{-x^2}): Golub-Welsch starting
// points polished by Newton steps on the orthonormal recurrence.
void hermite_rule(int n, std::vector<double>& x, std::vector<double>& h) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) jacobi(k, k + 1) = jacobi(k + 1, k) = std::sqrt(0.5 * (k + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  x.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  h.assign(n, 0.0);

  const double pim4 = std::pow(std::numbers::pi, -0.25);
  for (int k = 0; k < n; ++k) {
    double z = x[k], pp = 0.0;
    for (int iter = 0; iter < 20; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[k] = z;
    h[k] = 2.0 / (pp * pp);
  }
  // Exact mirror symmetry about the origin.
  for (int k = 0; k < n / 2; ++k) {
    const int mirror = n - 1 - k;
    const double a = 0.5 * (x[mirror] - x[k]);
    const double w = 0.5 * (h[mirror] + h[k]);
    x[k] = -a;
    x[mirror] = a;
    h[k] = h[mirror] = w;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n, mirrored exactly.
void legendre_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double z = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-16) break;
    }
    x[k] = -z;
    x[n - 1 - k] = z;
    w[k] = w[n - 1 - k] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

double support_epsilon(const RVector& eigenvalues) {
  return kSupportThreshold * std::max(eigenvalues.maxCoeff(), 0.0);
}

EstimationOutcome outcome_from(const CMatrix& rho_bar, const CMatrix& centered, const GaussianPrior& prior) {
  if (std::abs(rho_bar.trace() - Complex(1.0)) > 1e-8)
    throw InvariantViolation("estimation: averaged state trace is not 1");

  EstimationOutcome out;
  out.L_centered = personick_centered(rho_bar, centered);
  out.gain = (rho_bar * out.L_centered * out.L_centered).trace().real();
  out.var_est = prior.variance() - out.gain;
  out.ratio = out.var_est / prior.variance();
  if (!(out.ratio >= -kRatioTolerance && out.ratio <= 1.0 + kRatioTolerance))
    throw NumericalFailure("estimation: variance ratio " + std::to_string(out.ratio) + " outside [0, 1]");

  const EigenSystem es = herm_eig(out.L_centered);
  const Eigen::Index d = rho_bar.rows();
  out.spectrum = es.values.array() + prior.B0;
  out.eigenvectors = es.vectors;
  out.probabilities.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto v = es.vectors.col(k);
    out.probabilities(k) = std::max(0.0, (v.adjoint() * rho_bar * v)(0, 0).real());
  }
  out.L = HermitianOperator(hermitian_part(out.L_centered + prior.B0 * CMatrix::Identity(d, d)));
  return out;
}

// tr(rho L^2) for the SLD of (rho, derivative).
double fisher_from(const CMatrix& rho, const CMatrix& derivative) {
  const EigenSystem es = herm_eig(rho);
  const double eps = support_epsilon(es.values);
  const CMatrix x = es.vectors.adjoint() * derivative * es.vectors;
  double f = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double denom = std::max(es.values(i), 0.0) + std::max(es.values(j), 0.0);
      if (denom > eps) f += 2.0 * std::norm(x(i, j)) / denom;
    }
  return f;
}

}  // namespace

GaussianPrior::GaussianPrior(double mean, double stddev) : B0(mean), dB(stddev) {
  if (!(stddev > 0.0) || !std::isfinite(stddev) || !std::isfinite(mean))
    throw std::invalid_argument("GaussianPrior: dB must be finite and > 0");
}

QuadratureGrid gauss_hermite_grid(const GaussianPrior& prior, int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("gauss_hermite_grid: need at least 2 nodes");
  std::vector<double> x, h;
  hermite_rule(n_nodes, x, h);
  QuadratureGrid grid;
  grid.nodes.resize(n_nodes);
  grid.weights.resize(n_nodes);
  double total = 0.0;
  for (double w : h) total += w;
  for (int k = 0; k < n_nodes; ++k) {
    grid.nodes[k] = prior.B0 + std::numbers::sqrt2 * prior.dB * x[k];
    grid.weights[k] = h[k] / total;
  }
  return grid;
}

QuadratureGrid prior_quadrature(const GaussianPrior& prior, int n_nodes, double max_rate) {
  if (n_nodes < 2) throw std::invalid_argument("prior_quadrature: need at least 2 nodes");
  if (!(max_rate >= 0.0)) throw std::invalid_argument("prior_quadrature: max_rate must be >= 0");
  // Frequency in units of the prior width; Gauss-Hermite integrates
  // exp(i w x) to machine precision for w up to about 1.1 sqrt(n).
  const double w = max_rate * prior.dB;
  if (w <= 0.8 * std::sqrt(static_cast<double>(n_nodes))) return gauss_hermite_grid(prior, n_nodes);

  constexpr double kHalfWidth = 9.0;  // standard deviations
  const int order = std::max(2, n_nodes / 4);
  const double max_panel = std::min(1.0, 10.0 / w);
  const int half_panels = static_cast<int>(std::ceil(kHalfWidth / max_panel));
  const double h = kHalfWidth / half_panels;
  std::vector<double> gx, gw;
  legendre_rule(order, gx, gw);

  std::vector<double> xs, ws;
  for (int p = 0; p < half_panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int k = 0; k < order; ++k) {
      const double x = mid + 0.5 * h * gx[k];
      xs.push_back(x);
      ws.push_back(0.5 * h * gw[k] * std::exp(-0.5 * x * x));
    }
  }
  double total = 0.0;
  for (double v : ws) total += 2.0 * v;

  QuadratureGrid grid;
  const std::size_t half = xs.size();
  grid.nodes.resize(2 * half);
  grid.weights.resize(2 * half);
  for (std::size_t k = 0; k < half; ++k) {
    const double dx = prior.dB * xs[k];
    grid.nodes[half - 1 - k] = prior.B0 - dx;
    grid.nodes[half + k] = prior.B0 + dx;
    grid.weights[half - 1 - k] = grid.weights[half + k] = ws[k] / total;
  }
  return grid;
}

CMatrix personick_centered(const CMatrix& rho_bar, const CMatrix& rho_bar_prime_centered) {
  if (rho_bar.rows() != rho_bar_prime_centered.rows() || rho_bar.cols() != rho_bar_prime_centered.cols())
    throw std::invalid_argument("personick: dimension mismatch");
  const EigenSystem es = herm_eig(rho_bar);
  const double eps = support_epsilon(es.values);
  const CMatrix x = es.vectors.adjoint() * rho_bar_prime_centered * es.vectors;
  const Eigen::Index d = x.rows();
  CMatrix l = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double li = std::max(es.values(i), 0.0);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double lj = std::max(es.values(j), 0.0);
      if (li > eps || lj > eps) l(i, j) = 2.0 * x(i, j) / (li + lj);
    }
  }
  return hermitian_part(es.vectors * l * es.vectors.adjoint());
}

HermitianOperator personick_observable(const CMatrix& rho_bar, const CMatrix& rho_bar_prime) {
  if (rho_bar.rows() != rho_bar_prime.rows() || rho_bar.cols() != rho_bar_prime.cols())
    throw std::invalid_argument("personick: dimension mismatch");
  const Complex tr = rho_bar.trace();
  if (std::abs(tr - Complex(1.0)) > 1e-8) throw InvariantViolation("personick: averaged state trace is not 1");
  const double mean = rho_bar_prime.trace().real() / tr.real();
  const Eigen::Index d = rho_bar.rows();
  const CMatrix lc = personick_centered(rho_bar, rho_bar_prime - mean * rho_bar);
  return HermitianOperator(hermitian_part(lc + mean * CMatrix::Identity(d, d)));
}

EstimationOutcome estimation_variance(const CMatrix& rho_bar, const CMatrix& rho_bar_prime,
                                      const GaussianPrior& prior) {
  if (rho_bar.rows() != rho_bar_prime.rows() || rho_bar.cols() != rho_bar_prime.cols())
    throw std::invalid_argument("estimation: dimension mismatch");
  return outcome_from(rho_bar, rho_bar_prime - prior.B0 * rho_bar, prior);
}

BasisGain basis_gain(const CMatrix& basis, const CMatrix& rho_bar, const CMatrix& rho_bar_prime,
                     const GaussianPrior& prior) {
  const Eigen::Index d = rho_bar.rows();
  if (basis.rows() != d || basis.cols() != d || rho_bar_prime.rows() != d || rho_bar_prime.cols() != d)
    throw std::invalid_argument("basis_gain: basis and states must be d x d");
  if (max_abs(basis.adjoint() * basis - CMatrix::Identity(d, d)) > 1e-10)
    throw std::invalid_argument("basis_gain: basis is not orthonormal");

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(rho_bar), Eigen::EigenvaluesOnly);
  const double eps = support_epsilon(solver.eigenvalues());
  const CMatrix centered = rho_bar_prime - prior.B0 * rho_bar;
  double gain = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto e = basis.col(k);
    const double p = (e.adjoint() * rho_bar * e)(0, 0).real();
    if (p < eps || p <= 0.0) continue;
    const double first = (e.adjoint() * centered * e)(0, 0).real();
    gain += first * first / p;
  }
  return {gain, 1.0 - gain / prior.variance()};
}

BayesProblem::BayesProblem(const DotModel& model, const GaussianPrior& prior, QuadratureGrid grid, double t,
                           int max_dots)
    : prior_(prior), grid_(std::move(grid)), t_(t) {
  if (!(t >= 0.0)) throw std::invalid_argument("BayesProblem: t must be >= 0");
  if (grid_.nodes.size() != grid_.weights.size() || grid_.nodes.empty())
    throw std::invalid_argument("BayesProblem: malformed quadrature grid");
  std::vector<ChannelCoeffs> channels;
  std::vector<double> shifted(grid_.nodes.size());
  channels.reserve(grid_.nodes.size());
  for (std::size_t j = 0; j < grid_.nodes.size(); ++j) {
    channels.push_back(model.coefficients(grid_.nodes[j], t));
    check_coefficients(channels.back());
    shifted[j] = grid_.weights[j] * (grid_.nodes[j] - prior_.B0);
  }
  average_ = ProductChannelMixture(grid_.weights, channels, max_dots);
  centered_ = ProductChannelMixture(shifted, channels, max_dots);
}

BayesProblem::BayesProblem(const DotModel& model, const GaussianPrior& prior, int n_nodes, double t, int max_dots)
    : BayesProblem(model, prior,
                   prior_quadrature(prior, n_nodes, max_dots * std::abs(larmor_omega(1.0, model.g_factor)) * t), t,
                   max_dots) {}

MeanStates BayesProblem::mean_states(const CMatrix& rho0) const {
  MeanStates ms;
  ms.rho_bar = hermitian_part(average_.apply(rho0));
  ms.rho_bar_prime_centered = hermitian_part(centered_.apply(rho0));
  ms.rho_bar_prime = hermitian_part(ms.rho_bar_prime_centered + prior_.B0 * ms.rho_bar);
  return ms;
}

EstimationOutcome BayesProblem::evaluate(const CMatrix& rho0) const {
  const MeanStates ms = mean_states(rho0);
  return outcome_from(ms.rho_bar, ms.rho_bar_prime_centered, prior_);
}

EstimationOutcome BayesProblem::evaluate(const PureState& psi) const {
  const CVector& v = psi.amplitudes();
  return evaluate(CMatrix(v * v.adjoint()));
}

CMatrix BayesProblem::iteration_matrix(const CMatrix& L_centered) const {
  const CMatrix l2 = L_centered * L_centered;
  return hermitian_part(average_.apply_dual(l2) - 2.0 * centered_.apply_dual(L_centered));
}

MeanStates mean_states(const PureState& psi0, const DotModel& model, double t, const QuadratureGrid& grid) {
  if (grid.nodes.empty()) throw std::invalid_argument("mean_states: empty grid");
  double mean = 0.0;
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) mean += grid.weights[j] * grid.nodes[j];
  // A degenerate spread is fine here: only the prior mean is used.
  GaussianPrior prior;
  prior.B0 = mean;
  const BayesProblem problem(model, prior, grid, t);
  const CVector& v = psi0.amplitudes();
  MeanStates ms = problem.mean_states(CMatrix(v * v.adjoint()));
  DensityMatrix validated(ms.rho_bar);  // throws if the average is not a state
  (void)validated;
  return ms;
}

FisherInformation sld_fisher(const PureState& psi0, const DotModel& model, double t, double field_tesla,
                             double delta_tesla) {
  if (!(delta_tesla > 0.0)) throw std::invalid_argument("sld_fisher: delta must be > 0");
  const CVector& v = psi0.amplitudes();
  const CMatrix rho0 = v * v.adjoint();
  auto evolved = [&](double b) {
    CMatrix r = rho0;
    const ChannelCoeffs c = model.coefficients(b, t);
    apply_product_channel(r, c.A, c.E);
    return r;
  };
  const CMatrix rho = evolved(field_tesla);
  auto estimate = [&](double step) {
    const CMatrix derivative = hermitian_part((evolved(field_tesla + step) - evolved(field_tesla - step)) / (2.0 * step));
    return fisher_from(rho, derivative);
  };
  FisherInformation out;
  out.value = estimate(delta_tesla);
  out.value_half = estimate(0.5 * delta_tesla);
  const double scale = std::max(std::abs(out.value), 1e-300);
  out.converged = std::abs(out.value - out.value_half) <= 1e-2 * scale || out.value == out.value_half;
  return out;
}

double van_trees_bound(const PureState& psi0, const DotModel& model, double t, const GaussianPrior& prior,
                       const QuadratureGrid& grid, double delta_tesla) {
  const double step = delta_tesla > 0.0 ? delta_tesla : 1e-3 * prior.dB;
  double mean_fisher = 0.0;
  for (std::size_t j = 0; j < grid.nodes.size(); ++j)
    mean_fisher += grid.weights[j] * sld_fisher(psi0, model, t, grid.nodes[j], step).value;
  return 1.0 / (mean_fisher + 1.0 / prior.variance());
}

}  // namespace qdmag
