#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "qdmag/bayesest.hpp"
#include "qdmag/errors.hpp"

using namespace qdmag;
using qdmag::testing::Gen;

namespace {

DotModel default_model() { return make_dot_model(Material{}, AlphaMode::variance_matched, 49); }

double grid_sum(const QuadratureGrid& g, auto f) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.nodes.size(); ++j) s += g.weights[j] * f(g.nodes[j]);
  return s;
}

void expect_mirror_symmetric(const QuadratureGrid& g, double b0) {
  const std::size_t n = g.nodes.size();
  for (std::size_t j = 0; j < n; ++j) {
    EXPECT_NEAR(g.nodes[j] - b0, b0 - g.nodes[n - 1 - j], 1e-15 * std::max(1.0, std::abs(b0)));
    EXPECT_EQ(g.weights[j], g.weights[n - 1 - j]);
  }
}

// Sum over quadrature nodes of the evolved states, one node at a time.
MeanStates mean_states_oracle(const PureState& psi, const DotModel& model, double t, const QuadratureGrid& grid) {
  const CVector& v = psi.amplitudes();
  const CMatrix rho0 = v * v.adjoint();
  MeanStates ms;
  ms.rho_bar = CMatrix::Zero(rho0.rows(), rho0.cols());
  ms.rho_bar_prime = ms.rho_bar;
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
    CMatrix r = rho0;
    const ChannelCoeffs c = model.coefficients(grid.nodes[j], t);
    apply_product_channel(r, c.A, c.E);
    ms.rho_bar += grid.weights[j] * r;
    ms.rho_bar_prime += grid.weights[j] * grid.nodes[j] * r;
  }
  return ms;
}

CMatrix sylvester_residual(const CMatrix& L, const CMatrix& rho, const CMatrix& prime) {
  return 0.5 * (L * rho + rho * L) - prime;
}

}  // namespace

TEST(Quadrature, TwoPointGaussHermite) {
  const GaussianPrior prior(7e-3, 4e-3);
  const QuadratureGrid g = gauss_hermite_grid(prior, 2);
  ASSERT_EQ(g.nodes.size(), 2u);
  EXPECT_NEAR(g.nodes[0], 3e-3, 1e-17);
  EXPECT_NEAR(g.nodes[1], 11e-3, 1e-17);
  EXPECT_NEAR(g.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(g.weights[1], 0.5, 1e-15);
}

TEST(Quadrature, GaussianMoments) {
  for (double b0 : {0.0, 7e-3, 1.0}) {
    const GaussianPrior prior(b0, 4e-3);
    const double s2 = prior.variance();
    const QuadratureGrid g = gauss_hermite_grid(prior, 8);
    EXPECT_NEAR(grid_sum(g, [](double) { return 1.0; }), 1.0, 1e-14);
    EXPECT_NEAR(grid_sum(g, [](double b) { return b; }), b0, 1e-15);
    EXPECT_NEAR(grid_sum(g, [&](double b) { return (b - b0) * (b - b0); }), s2, 1e-14 * s2);
    const double m4 = b0 * b0 * b0 * b0 + 6 * b0 * b0 * s2 + 3 * s2 * s2;
    EXPECT_NEAR(grid_sum(g, [](double b) { return b * b * b * b; }), m4, 1e-12 * m4);
    expect_mirror_symmetric(g, b0);
  }
  EXPECT_THROW(gauss_hermite_grid(GaussianPrior(0, 1), 1), std::invalid_argument);
  EXPECT_THROW(GaussianPrior(0, 0), std::invalid_argument);
}

TEST(Quadrature, SlowIntegrandsUseGaussHermite) {
  const GaussianPrior prior(7e-3, 4e-3);
  const QuadratureGrid a = prior_quadrature(prior, 64, 100.0);
  const QuadratureGrid b = gauss_hermite_grid(prior, 64);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.weights, b.weights);
}

TEST(Quadrature, PropertyOscillatoryCharacteristicFunction) {
  // E[cos(w (B - B0))] = exp(-w^2 dB^2 / 2) for a Gaussian prior.
  Gen gen(41);
  for (int trial = 0; trial < 30; ++trial) {
    const GaussianPrior prior(gen.uniform(-0.01, 1.0), gen.uniform(1e-3, 5e-3));
    const double rate = std::pow(10.0, gen.uniform(2.0, 6.5));
    const QuadratureGrid g = prior_quadrature(prior, 64, rate);
    expect_mirror_symmetric(g, prior.B0);
    EXPECT_NEAR(grid_sum(g, [](double) { return 1.0; }), 1.0, 1e-13);
    EXPECT_NEAR(grid_sum(g, [&](double b) { return (b - prior.B0) * (b - prior.B0); }), prior.variance(),
                1e-10 * prior.variance());
    for (double frac : {0.3, 0.7, 1.0}) {
      const double w = frac * rate;
      const double exact = std::exp(-0.5 * w * w * prior.variance());
      EXPECT_NEAR(grid_sum(g, [&](double b) { return std::cos(w * (b - prior.B0)); }), exact, 1e-12)
          << "rate " << rate << " frac " << frac;
    }
  }
}

TEST(Personick, FieldIndependentFamily) {
  Gen gen(42);
  const CMatrix rho = gen.density(4);
  const double b0 = 7e-3;
  const HermitianOperator L = personick_observable(rho, b0 * rho);
  EXPECT_LT(max_abs(L.matrix() - b0 * CMatrix::Identity(4, 4)), 1e-17);
  const EstimationOutcome out = estimation_variance(rho, b0 * rho, GaussianPrior(b0, 4e-3));
  EXPECT_NEAR(out.gain, 0.0, 1e-20);
  EXPECT_NEAR(out.ratio, 1.0, 1e-12);
}

TEST(Personick, TwoPointFamily) {
  // Two equally likely fields +-b imprint |0> and |1>: perfectly distinguishable.
  const double b = 4e-3;
  const CMatrix rho = CMatrix::Identity(2, 2) / 2.0;
  const CMatrix prime = 0.5 * b * pauli::z();
  const HermitianOperator L = personick_observable(rho, prime);
  EXPECT_LT(max_abs(L.matrix() - b * pauli::z()), 1e-17);
  const EstimationOutcome out = estimation_variance(rho, prime, GaussianPrior(0.0, b));
  EXPECT_NEAR(out.var_est, 0.0, 1e-18);
  EXPECT_NEAR(out.ratio, 0.0, 1e-12);
  EXPECT_NEAR(out.spectrum(0), -b, 1e-17);
  EXPECT_NEAR(out.spectrum(1), b, 1e-17);
}

TEST(Personick, RejectsBadTrace) {
  EXPECT_THROW(personick_observable(CMatrix::Identity(2, 2), pauli::z()), InvariantViolation);
  EXPECT_THROW(personick_observable(CMatrix::Identity(2, 2) / 2.0, CMatrix::Zero(4, 4)), std::invalid_argument);
}

TEST(Personick, PropertySolvesSylvesterOnFullRank) {
  Gen gen(43);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 << gen.integer(1, 5);
    const CMatrix rho = gen.density(d);
    const CMatrix prime = 1e-3 * gen.hermitian(d);
    const HermitianOperator L = personick_observable(rho, prime);
    EXPECT_LT(max_abs(sylvester_residual(L.matrix(), rho, prime)), 1e-9);
  }
}

TEST(Personick, PropertyKernelBlockIsPriorMean) {
  // rho supported on a random subspace; rho' lives on the same support.
  Gen gen(44);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 4, r = gen.integer(1, 3);
    const CMatrix u = gen.unitary(d);
    const CMatrix p = u.leftCols(r);
    CMatrix small = gen.density(r);
    const CMatrix rho = p * small * p.adjoint();
    const CMatrix prime = p * (1e-3 * gen.hermitian(r)) * p.adjoint();
    const HermitianOperator L = personick_observable(rho, prime);
    EXPECT_LT(max_abs(sylvester_residual(L.matrix(), rho, prime)), 1e-9);
    const double mean = prime.trace().real();
    const CMatrix kernel = u.rightCols(d - r);
    EXPECT_LT(max_abs(kernel.adjoint() * L.matrix() * kernel - mean * CMatrix::Identity(d - r, d - r)), 1e-12);
  }
}

TEST(BasisGain, EigenbasisAttainsPersonick) {
  Gen gen(45);
  const GaussianPrior prior(7e-3, 4e-3);
  const DotModel model = default_model();
  for (double t : {2.0, 6.0, 30.0}) {
    const BayesProblem problem(model, prior, 64, t, 2);
    const PureState psi = gen.state(4);
    const EstimationOutcome out = problem.evaluate(psi);
    const MeanStates ms = problem.mean_states(CMatrix(psi.amplitudes() * psi.amplitudes().adjoint()));
    const BasisGain bg = basis_gain(out.eigenvectors, ms.rho_bar, ms.rho_bar_prime, prior);
    EXPECT_NEAR(bg.ratio, out.ratio, 1e-10);
  }
}

TEST(BasisGain, ConjugateBasisCarriesNoInformation) {
  const double b = 4e-3;
  CMatrix xbasis(2, 2);
  xbasis << 1, 1, 1, -1;
  xbasis /= std::numbers::sqrt2;
  const BasisGain bg = basis_gain(xbasis, CMatrix::Identity(2, 2) / 2.0, 0.5 * b * pauli::z(), GaussianPrior(0, b));
  EXPECT_NEAR(bg.gain, 0.0, 1e-20);
  EXPECT_NEAR(bg.ratio, 1.0, 1e-12);
  EXPECT_THROW(basis_gain(2.0 * xbasis, CMatrix::Identity(2, 2) / 2.0, pauli::z(), GaussianPrior(0, b)),
               std::invalid_argument);
}

TEST(BasisGain, PropertyNeverBeatsPersonick) {
  Gen gen(46);
  const GaussianPrior prior(7e-3, 4e-3);
  const DotModel model = default_model();
  for (int trial = 0; trial < 20; ++trial) {
    const int dots = gen.integer(1, 3);
    const BayesProblem problem(model, prior, 64, gen.uniform(0.1, 200), dots);
    const PureState psi = gen.state(1 << dots);
    const CMatrix rho0 = psi.amplitudes() * psi.amplitudes().adjoint();
    const EstimationOutcome out = problem.evaluate(rho0);
    const MeanStates ms = problem.mean_states(rho0);
    for (int k = 0; k < 10; ++k) {
      const BasisGain bg = basis_gain(gen.unitary(1 << dots), ms.rho_bar, ms.rho_bar_prime, prior);
      EXPECT_LE(bg.gain, out.gain + 1e-10 * prior.variance());
    }
  }
}

TEST(MeanStates, IdentityAtZeroTime) {
  Gen gen(47);
  const DotModel model = default_model();
  const GaussianPrior prior(7e-3, 4e-3);
  const PureState psi = gen.state(4);
  const MeanStates ms = mean_states(psi, model, 0.0, gauss_hermite_grid(prior, 16));
  const CMatrix rho0 = psi.amplitudes() * psi.amplitudes().adjoint();
  EXPECT_LT(max_abs(ms.rho_bar - rho0), 1e-14);
  EXPECT_LT(max_abs(ms.rho_bar_prime - prior.B0 * rho0), 1e-16);
}

TEST(MeanStates, PropertyMatchesNodeByNodeSum) {
  Gen gen(48);
  const DotModel model = default_model();
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianPrior prior(gen.uniform(0, 0.01), gen.uniform(1e-3, 5e-3));
    const int dots = gen.integer(1, 4);
    const double t = gen.uniform(0, 100);
    const PureState psi = gen.state(1 << dots);
    const QuadratureGrid grid = prior_quadrature(prior, 32, dots * std::abs(larmor_omega(1.0, -0.44)) * t);
    const MeanStates got = BayesProblem(model, prior, grid, t, dots)
                               .mean_states(CMatrix(psi.amplitudes() * psi.amplitudes().adjoint()));
    const MeanStates want = mean_states_oracle(psi, model, t, grid);
    EXPECT_LT(max_abs(got.rho_bar - want.rho_bar), 1e-12);
    EXPECT_LT(max_abs(got.rho_bar_prime - want.rho_bar_prime), 1e-14);
    EXPECT_NEAR(got.rho_bar_prime.trace().real(), grid_sum(grid, [](double b) { return b; }), 1e-15);
  }
}

TEST(Estimation, RatioIsOneAtZeroTime) {
  Gen gen(49);
  const DotModel model = default_model();
  const GaussianPrior prior(7e-3, 4e-3);
  for (int dots = 1; dots <= 4; ++dots) {
    const BayesProblem problem(model, prior, 64, 0.0, dots);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(problem.evaluate(gen.state(1 << dots)).ratio, 1.0, 1e-9);
  }
}

TEST(Estimation, PropertyRatioRangeAndMeanObservable) {
  Gen gen(50);
  const DotModel model = default_model();
  for (int trial = 0; trial < 40; ++trial) {
    const GaussianPrior prior(gen.uniform(0, 0.02), gen.uniform(1e-3, 5e-3));
    const int dots = gen.integer(1, 3);
    const BayesProblem problem(model, prior, 64, std::pow(10.0, gen.uniform(-1, 3.3)), dots);
    const PureState psi = gen.state(1 << dots);
    const CMatrix rho0 = psi.amplitudes() * psi.amplitudes().adjoint();
    const EstimationOutcome out = problem.evaluate(rho0);
    EXPECT_GE(out.ratio, -1e-10);
    EXPECT_LE(out.ratio, 1.0 + 1e-10);
    const MeanStates ms = problem.mean_states(rho0);
    EXPECT_NEAR((ms.rho_bar * out.L.matrix()).trace().real(), prior.B0, 1e-10 * std::max(prior.B0, prior.dB));
    EXPECT_NEAR(out.probabilities.sum(), 1.0, 1e-10);
  }
}

TEST(Estimation, PropertyIterationMatrixGivesPosteriorVariance) {
  Gen gen(51);
  const DotModel model = default_model();
  const GaussianPrior prior(7e-3, 4e-3);
  for (int trial = 0; trial < 20; ++trial) {
    const int dots = gen.integer(1, 3);
    const BayesProblem problem(model, prior, 64, gen.uniform(0.5, 50), dots);
    const PureState psi = gen.state(1 << dots);
    const EstimationOutcome out = problem.evaluate(psi);
    const CMatrix m = problem.iteration_matrix(out.L_centered);
    const double quad_var =
        grid_sum(problem.grid(), [&](double b) { return (b - prior.B0) * (b - prior.B0); });
    const double mse = (psi.amplitudes().adjoint() * m * psi.amplitudes())(0, 0).real() + quad_var;
    EXPECT_NEAR(mse, out.var_est + (quad_var - prior.variance()), 1e-12 * prior.variance());
  }
}

TEST(Fisher, ZeroAtZeroTime) {
  const DotModel model = default_model();
  const PureState plus = PureState::normalized(CVector::Constant(2, 1.0));
  EXPECT_EQ(sld_fisher(plus, model, 0.0, 7e-3, 4e-6).value, 0.0);
  EXPECT_THROW(sld_fisher(plus, model, 1.0, 7e-3, 0.0), std::invalid_argument);
}

TEST(Fisher, StableUnderStepHalving) {
  const DotModel model = default_model();
  const PureState plus = PureState::normalized(CVector::Constant(2, 1.0));
  for (double t : {1.0, 6.0, 40.0}) {
    const FisherInformation f = sld_fisher(plus, model, t, 7e-3, 4e-6);
    EXPECT_GT(f.value, 0.0);
    EXPECT_LT(std::abs(f.value - f.value_half) / f.value, 1e-3);
    EXPECT_TRUE(f.converged);
  }
}

TEST(Fisher, PopulationStateIsEvenInField) {
  const DotModel model = default_model();
  const PureState zero(basis_vector(2, 0));
  for (double b : {1e-3, 4e-3, 9e-3})
    for (double t : {5.0, 30.0}) {
      const double fp = sld_fisher(zero, model, t, b, 4e-6).value;
      const double fm = sld_fisher(zero, model, t, -b, 4e-6).value;
      EXPECT_NEAR(fp, fm, 1e-9 * fp);
    }
}

TEST(VanTrees, TightAtZeroTime) {
  const DotModel model = default_model();
  const GaussianPrior prior(7e-3, 4e-3);
  const PureState plus = PureState::normalized(CVector::Constant(2, 1.0));
  EXPECT_NEAR(van_trees_bound(plus, model, 0.0, prior, gauss_hermite_grid(prior, 16)), prior.variance(), 1e-20);
}

TEST(VanTrees, PropertyBoundsPosteriorVariance) {
  Gen gen(52);
  const DotModel model = default_model();
  const GaussianPrior prior(7e-3, 4e-3);
  for (int trial = 0; trial < 10; ++trial) {
    const int dots = gen.integer(1, 2);
    const double t = gen.uniform(0.2, 40.0);
    const BayesProblem problem(model, prior, 64, t, dots);
    const PureState psi = gen.state(1 << dots);
    const double bound = van_trees_bound(psi, model, t, prior, problem.grid());
    EXPECT_GE(problem.evaluate(psi).var_est, bound - 1e-9 * prior.variance());
  }
}
