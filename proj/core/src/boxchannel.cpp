#include "qdmag/boxchannel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qdmag/errors.hpp"

namespace qdmag {
namespace {

struct Block {
  double d;       // E_m + E_{m+1} = Omega + alpha (2m+1)/2
  double m2;      // M^2
  double chi;     // sqrt(d^2 + 4 M^2) / 2
};

// K(K+1) - m(m+1) computed exactly from doubled quantum numbers.
double ladder_factor(HalfInt K, HalfInt m) {
  const long k2 = K.twice, m2 = m.twice;
  return static_cast<double>(k2 * (k2 + 2) - m2 * (m2 + 2)) / 4.0;
}

Block block(HalfInt K, HalfInt m, double omega, double alpha) {
  const double d = omega + alpha * (m.twice + 1) * 0.5;
  const double m2 = 0.25 * alpha * alpha * ladder_factor(K, m);
  return {d, m2, 0.5 * std::sqrt(d * d + 4.0 * m2)};
}

void check_projection(HalfInt K, HalfInt m) {
  if (K.twice < 0) throw std::invalid_argument("mixing: K must be >= 0");
  if ((m.twice - K.twice) % 2 != 0 || m.twice < -K.twice - 2 || m.twice > K.twice)
    throw std::invalid_argument("mixing: m outside {-K-1, ..., K}");
}

bool is_power_of_two(Eigen::Index n) { return n > 0 && std::has_single_bit(static_cast<std::uint64_t>(n)); }

}  // namespace

MixingData mixing(HalfInt K, HalfInt m, double omega, double alpha) {
  check_projection(K, m);
  if (!(alpha > 0.0)) throw std::invalid_argument("mixing: alpha must be > 0");
  const Block b = block(K, m, omega, alpha);

  // Squared components of the upper eigenvector, each from the formula that
  // avoids cancellation for the sign of d.
  double sin2 = 0.0, cos2 = 1.0;
  if (b.chi > 0.0) {
    if (b.d >= 0.0) {
      sin2 = b.m2 / (b.chi * (2.0 * b.chi + b.d));
      cos2 = 1.0 - sin2;
    } else {
      cos2 = b.m2 / (b.chi * (2.0 * b.chi - b.d));
      sin2 = 1.0 - cos2;
    }
  }
  MixingData out;
  out.K = K;
  out.m = m;
  out.chi = b.chi;
  out.sin_theta = std::sqrt(sin2);
  out.cos_theta = std::sqrt(cos2);
  out.e_m = 0.5 * (omega + alpha * m.value());
  out.m_km = std::sqrt(b.m2);
  out.e_plus = -0.25 * alpha + b.chi;
  return out;
}

Complex amplitude_X(HalfInt K, HalfInt m, double field_tesla, double t, double alpha, double g_factor) {
  const MixingData mx = mixing(K, m, larmor_omega(field_tesla, g_factor), alpha);
  const double c2 = mx.cos_theta * mx.cos_theta;
  const double s2 = mx.sin_theta * mx.sin_theta;
  return c2 * std::polar(1.0, -mx.chi * t) + s2 * std::polar(1.0, mx.chi * t);
}

void check_coefficients(const ChannelCoeffs& c) {
  if (!(c.A >= -1e-12 && c.A <= 1.0 + 1e-12))
    throw InvariantViolation("ChannelCoeffs: A = " + std::to_string(c.A) + " outside [0, 1]");
  if (std::abs(c.E) > c.A + 1e-10)
    throw InvariantViolation("ChannelCoeffs: |E| = " + std::to_string(std::abs(c.E)) + " exceeds A = " +
                             std::to_string(c.A));
}

ChannelEvaluator::ChannelEvaluator(const BathSpec& bath, double field_tesla, double g_factor)
    : field_(field_tesla) {
  const double omega = larmor_omega(field_tesla, g_factor);
  levels_.reserve(bath.levels.size());
  for (const auto& level : bath.levels) {
    Level lv;
    lv.P = level.weight_per_m;
    const int count = level.K.twice + 2;  // m = -K-1 .. K
    lv.chi.resize(count);
    lv.polarization.resize(count);
    lv.flip.resize(count);
    for (int j = 0; j < count; ++j) {
      const HalfInt m{-level.K.twice - 2 + 2 * j};
      const Block b = block(level.K, m, omega, bath.alpha);
      lv.chi[j] = b.chi;
      if (b.chi > 0.0) {
        const double denom = b.d * b.d + 4.0 * b.m2;
        lv.polarization[j] = b.d / (2.0 * b.chi);
        lv.flip[j] = 4.0 * b.m2 / denom;
      } else {
        lv.polarization[j] = 1.0;
        lv.flip[j] = 0.0;
      }
    }
    levels_.push_back(std::move(lv));
  }
}

ChannelCoeffs ChannelEvaluator::at(double t) const {
  // |X|^2 = 1 - sin^2(2 theta) sin^2(chi t). The boundary terms m = K and
  // m = -K-1 have unit modulus, so sum_{m=-K}^{K} |X_m|^2 equals
  // (2K+1) - sum_{m=-K-1}^{K} flip_m sin^2(chi_m t). That range is symmetric
  // under m -> -m-1, which maps the field to its negative; summing the terms
  // in mirror pairs makes A exactly even in B.
  double loss = 0.0;
  Complex e_deficit{0.0, 0.0};
  std::vector<Complex> x;
  for (const auto& lv : levels_) {
    const int count = static_cast<int>(lv.chi.size());
    double level_loss = 0.0;
    for (int lo = 0, hi = count - 1; lo <= hi; ++lo, --hi) {
      const double s_hi = std::sin(lv.chi[hi] * t);
      double pair = lv.flip[hi] * s_hi * s_hi;
      if (lo != hi) {
        const double s_lo = std::sin(lv.chi[lo] * t);
        pair += lv.flip[lo] * s_lo * s_lo;
      }
      level_loss += pair;
    }
    loss += lv.P * level_loss;

    // X_m = cos(chi t) - i cos(2 theta) sin(chi t); E pairs X_m with X_{m-1}.
    // Accumulated as 1 - sum P (1 - X_m X_{m-1}) so that E(0) = 1 exactly.
    x.resize(count);
    for (int j = 0; j < count; ++j) {
      const double phase = lv.chi[j] * t;
      x[j] = Complex(std::cos(phase), -lv.polarization[j] * std::sin(phase));
    }
    Complex level_deficit{0.0, 0.0};
    for (int j = 1; j < count; ++j) level_deficit += Complex(1.0) - x[j] * x[j - 1];
    e_deficit += lv.P * level_deficit;
  }
  ChannelCoeffs c;
  c.A = 1.0 - loss;
  c.E = Complex(1.0) - e_deficit;
  c.B = field_;
  c.t = t;
  return c;
}

ChannelCoeffs coefficients_AE(const BathSpec& bath, double field_tesla, double t, double g_factor) {
  return ChannelEvaluator(bath, field_tesla, g_factor).at(t);
}

DotModel make_dot_model(const Material& material, AlphaMode mode, int n_bath) {
  return DotModel{bath_weights(n_bath, material.bath_spin, hyperfine_alpha(material, mode, n_bath)),
                  material.g_factor};
}

double box_model_validity_ns(const Material& material) {
  return material.n_phys / (material.A_total_ueV / kHbar_ueV_ns);
}

Eigen::Matrix2cd KrausSet::completeness() const {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& k : ops) sum += k.adjoint() * k;
  return sum;
}

Eigen::Matrix4cd KrausSet::choi() const {
  Eigen::Matrix4cd c = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Eigen::Matrix2cd unit = Eigen::Matrix2cd::Zero();
      unit(i, j) = 1.0;
      Eigen::Matrix2cd image = Eigen::Matrix2cd::Zero();
      for (const auto& k : ops) image += k * unit * k.adjoint();
      c.block<2, 2>(2 * i, 2 * j) = image;
    }
  return c;
}

KrausSet kraus_set(const ChannelCoeffs& c) {
  check_coefficients(c);
  const double a = std::clamp(c.A, 0.0, 1.0);
  const double r = std::min(std::abs(c.E), a);
  // |E| / conj(E) = E / |E|; the phase is irrelevant when E = 0.
  const Complex phase = r > 0.0 ? c.E / std::abs(c.E) : Complex(1.0);

  KrausSet k;
  for (auto& op : k.ops) op.setZero();
  k.ops[0](0, 1) = std::sqrt(1.0 - a);
  k.ops[1](1, 0) = std::sqrt(1.0 - a);
  const double plus = std::sqrt(0.5 * (a + r));
  const double minus = std::sqrt(0.5 * (a - r));
  k.ops[2](0, 0) = plus * phase;
  k.ops[2](1, 1) = plus;
  k.ops[3](0, 0) = -minus * phase;
  k.ops[3](1, 1) = minus;
  return k;
}

void apply_product_channel(CMatrix& m, double A, Complex E) {
  const Eigen::Index dim = m.rows();
  if (m.cols() != dim || !is_power_of_two(dim))
    throw std::invalid_argument("apply_product_channel: dimension is not a power of two");
  const Complex Ebar = std::conj(E);
  const double flip = 1.0 - A;
  for (Eigen::Index bit = 1; bit < dim; bit <<= 1) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (c & bit) continue;
      const Eigen::Index c1 = c | bit;
      for (Eigen::Index r = 0; r < dim; ++r) {
        if (r & bit) continue;
        const Eigen::Index r1 = r | bit;
        const Complex p00 = m(r, c), p11 = m(r1, c1);
        m(r, c) = A * p00 + flip * p11;
        m(r1, c1) = flip * p00 + A * p11;
        m(r, c1) *= E;
        m(r1, c) *= Ebar;
      }
    }
  }
}

DensityMatrix apply_single(const DensityMatrix& rho, const ChannelCoeffs& c) {
  if (rho.dim() != 2) throw std::invalid_argument("apply_single: expected a 2x2 state");
  return apply_n_dots(rho, c);
}

DensityMatrix apply_n_dots(const DensityMatrix& rho, const ChannelCoeffs& c) {
  CMatrix out = rho.matrix();
  apply_product_channel(out, c.A, c.E);
  return DensityMatrix::trusted(std::move(out));
}

HermitianOperator dual_apply_n_dots(const HermitianOperator& x, const ChannelCoeffs& c) {
  CMatrix out = x.matrix();
  apply_product_channel(out, c.A, std::conj(c.E));
  return HermitianOperator(std::move(out));
}

}  // namespace qdmag

namespace qdmag {

ProductChannelMixture::ProductChannelMixture(std::span<const double> weights,
                                             std::span<const ChannelCoeffs> channels, int max_dots)
    : max_dots_(max_dots) {
  if (max_dots < 1 || max_dots > kMaxDots) throw std::invalid_argument("ProductChannelMixture: bad max_dots");
  if (weights.size() != channels.size()) throw std::invalid_argument("ProductChannelMixture: size mismatch");
  const int n = max_dots + 1;
  moments_.assign(static_cast<std::size_t>(n) * n * n * n, Complex{0.0, 0.0});

  std::vector<std::array<int, 4>> exponents;
  for (int a = 0; a < n; ++a)
    for (int b = 0; a + b < n; ++b)
      for (int c = 0; a + b + c < n; ++c)
        for (int d = 0; a + b + c + d < n; ++d) exponents.push_back({a, b, c, d});

  std::vector<double> pa(n), pb(n);
  std::vector<Complex> pe(n), pf(n);
  for (std::size_t j = 0; j < channels.size(); ++j) {
    const ChannelCoeffs& ch = channels[j];
    pa[0] = pb[0] = 1.0;
    pe[0] = pf[0] = 1.0;
    for (int k = 1; k < n; ++k) {
      pa[k] = pa[k - 1] * ch.A;
      pb[k] = pb[k - 1] * (1.0 - ch.A);
      pe[k] = pe[k - 1] * ch.E;
      pf[k] = pf[k - 1] * std::conj(ch.E);
    }
    for (const auto& [a, b, c, d] : exponents)
      moments_[index(a, b, c, d)] += (weights[j] * pa[a] * pb[b]) * (pe[c] * pf[d]);
  }
}

std::size_t ProductChannelMixture::index(int a, int b, int c, int d) const {
  const std::size_t n = max_dots_ + 1;
  return ((static_cast<std::size_t>(a) * n + b) * n + c) * n + d;
}

Complex ProductChannelMixture::moment(int a, int b, int c, int d) const {
  if (std::min({a, b, c, d}) < 0 || a + b + c + d > max_dots_)
    throw std::invalid_argument("ProductChannelMixture: moment order out of range");
  return moments_[index(a, b, c, d)];
}

CMatrix ProductChannelMixture::apply(const CMatrix& m) const { return apply_impl(m, false); }

CMatrix ProductChannelMixture::apply_dual(const CMatrix& m) const { return apply_impl(m, true); }

CMatrix ProductChannelMixture::apply_impl(const CMatrix& m, bool dual) const {
  const Eigen::Index dim = m.rows();
  if (m.cols() != dim || !is_power_of_two(dim))
    throw std::invalid_argument("ProductChannelMixture: dimension is not a power of two");
  const int dots = std::countr_zero(static_cast<std::uint64_t>(dim));
  if (dots > max_dots_) throw std::invalid_argument("ProductChannelMixture: more dots than prepared for");

  // Per qubit: equal row/column bits either stay (A) or both flip (1-A);
  // |0><1| picks up E and |1><0| conj(E). The dual swaps E and conj(E).
  const std::uint64_t all = static_cast<std::uint64_t>(dim) - 1;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      const Complex v = m(r, c);
      if (v == Complex{0.0, 0.0}) continue;
      const std::uint64_t ru = r, cu = c;
      const std::uint64_t same = ~(ru ^ cu) & all;
      int up = std::popcount(~ru & cu & all);    // |0><1| factors
      int down = std::popcount(ru & ~cu & all);  // |1><0| factors
      if (dual) std::swap(up, down);
      const int n_same = std::popcount(same);
      for (std::uint64_t flip = same;; flip = (flip - 1) & same) {
        const int f = std::popcount(flip);
        out(static_cast<Eigen::Index>(ru ^ flip), static_cast<Eigen::Index>(cu ^ flip)) +=
            moments_[index(n_same - f, f, up, down)] * v;
        if (flip == 0) break;
      }
    }
  }
  return out;
}

}  // namespace qdmag
