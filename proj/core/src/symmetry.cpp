#include "qdmag/symmetry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "qdmag/optimizer.hpp"

namespace qdmag {
namespace {

int qubit_count(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw std::invalid_argument("symmetry: dimension is not a power of two");
  return n;
}

// Qubit q of the state is stored in bit (n - 1 - q).
CVector permute_qubits(const CVector& psi, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  CVector out(psi.size());
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    Eigen::Index y = 0;
    for (int q = 0; q < n; ++q)
      if ((x >> (n - 1 - perm[q])) & 1) y |= Eigen::Index{1} << (n - 1 - q);
    out(y) = psi(x);
  }
  return out;
}

double ascend(const CVector& c, int n, std::vector<double> theta) {
  const Eigen::Index d = c.size();
  auto value = [&](const std::vector<double>& th) {
    Complex s{0.0, 0.0};
    for (Eigen::Index x = 0; x < d; ++x) {
      double phase = 0.0;
      for (int q = 0; q < n; ++q)
        if ((x >> (n - 1 - q)) & 1) phase += th[q];
      s += c(x) * std::polar(1.0, phase);
    }
    return std::norm(s);
  };
  double current = value(theta);
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double before = current;
    for (int q = 0; q < n; ++q) {
      Complex s0{0.0, 0.0}, s1{0.0, 0.0};
      for (Eigen::Index x = 0; x < d; ++x) {
        double phase = 0.0;
        for (int p = 0; p < n; ++p)
          if ((x >> (n - 1 - p)) & 1) phase += theta[p];
        const Complex term = c(x) * std::polar(1.0, phase);
        if ((x >> (n - 1 - q)) & 1)
          s1 += term;
        else
          s0 += term;
      }
      if (std::abs(s0) > 0.0 && std::abs(s1) > 0.0) theta[q] += std::arg(s0) - std::arg(s1);
    }
    current = value(theta);
    if (current - before <= 1e-15) break;
  }
  return current;
}

CVector plus_qubit() { return CVector::Constant(2, Complex(std::numbers::sqrt2 / 2.0)); }

}  // namespace

double phase_aligned_fidelity(const CVector& target, const CVector& psi) {
  if (target.size() != psi.size()) throw std::invalid_argument("phase_aligned_fidelity: dimension mismatch");
  const int n = qubit_count(psi.size());
  const CVector c = target.conjugate().cwiseProduct(psi);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  double best = ascend(c, n, std::vector<double>(n, 0.0));
  for (int start = 0; start < 3; ++start) {
    std::vector<double> theta(n);
    for (auto& th : theta) th = angle(rng);
    best = std::max(best, ascend(c, n, theta));
  }
  return std::min(best, 1.0);
}

double symmetric_fidelity(const CVector& target, const CVector& psi) {
  const int n = qubit_count(psi.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    best = std::max(best, phase_aligned_fidelity(target, permute_qubits(psi, perm)));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double symmetric_overlap(const PureState& a, const PureState& b) {
  const CVector& u = a.amplitudes();
  const CVector& v = b.amplitudes();
  if (u.size() != v.size()) throw std::invalid_argument("symmetric_overlap: dimension mismatch");
  CVector flipped(v.size());
  for (Eigen::Index x = 0; x < v.size(); ++x) flipped(x) = std::conj(v(v.size() - 1 - x));
  return std::max(symmetric_fidelity(u, v), symmetric_fidelity(u, flipped));
}

double GhzPlusFit::a() const { return g / std::numbers::sqrt2; }
double GhzPlusFit::b() const { return (1.0 - g) / std::numbers::sqrt2; }

GhzPlusFit fit_ghz_plus(const PureState& psi) {
  const int n = psi.qubits();
  auto fidelity = [&](double g) {
    return phase_aligned_fidelity(ansatz(Ansatz::ghz_plus(g), n).amplitudes(), psi.amplitudes());
  };
  constexpr int kCoarse = 20;
  int best_k = 0;
  double best_f = -1.0;
  for (int k = 0; k <= kCoarse; ++k) {
    const double f = fidelity(double(k) / kCoarse);
    if (f > best_f) {
      best_f = f;
      best_k = k;
    }
  }
  double lo = std::max(0.0, double(best_k - 1) / kCoarse);
  double hi = std::min(1.0, double(best_k + 1) / kCoarse);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = fidelity(x1), f2 = fidelity(x2);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = fidelity(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = fidelity(x1);
    }
  }
  GhzPlusFit fit{0.5 * (lo + hi), 0.0};
  fit.fidelity = fidelity(fit.g);
  const double grid_g = double(best_k) / kCoarse;
  if (best_f > fit.fidelity) fit = {grid_g, best_f};
  return fit;
}

std::map<std::string, double> ansatz_fidelities(const PureState& psi) {
  const int n = psi.qubits();
  const CVector& v = psi.amplitudes();
  std::map<std::string, double> out;
  out["ghz"] = phase_aligned_fidelity(ansatz(Ansatz::ghz(), n).amplitudes(), v);
  out["plus_product"] = phase_aligned_fidelity(ansatz(Ansatz::plus_product(), n).amplitudes(), v);

  for (int k = 0; k < n; ++k) {
    double best = 0.0;
    // Choose which qubits carry |+>, and |0> or |1> on the others.
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != k) continue;
      const int zeros = n - k;
      for (unsigned bits = 0; bits < (1u << zeros); ++bits) {
        std::vector<CVector> factors;
        int z = 0;
        for (int q = 0; q < n; ++q) {
          if (mask & (1u << q)) {
            factors.push_back(plus_qubit());
          } else {
            factors.push_back(basis_vector(2, (bits >> z) & 1));
            ++z;
          }
        }
        best = std::max(best, phase_aligned_fidelity(tensor_vectors(factors), v));
      }
    }
    out[Ansatz::mixed_product(k).label()] = best;
  }
  out["ghz_plus"] = fit_ghz_plus(psi).fidelity;
  return out;
}

std::string regime_label(const std::map<std::string, double>& fidelities, double threshold) {
  std::string best_label = "other";
  double best = -1.0;
  // Fixed scan order makes ties deterministic (for one dot |+> == GHZ).
  std::vector<std::string> order;
  for (int k = kMaxDots; k >= 0; --k) {
    const std::string label = Ansatz::mixed_product(k).label();
    if (fidelities.contains(label)) order.push_back(label);
  }
  order.push_back("plus_product");
  order.push_back("ghz");
  for (const auto& label : order) {
    const auto it = fidelities.find(label);
    if (it != fidelities.end() && it->second > best) {
      best = it->second;
      best_label = label;
    }
  }
  if (const auto it = fidelities.find("ghz_plus"); it != fidelities.end()) {
    const double endpoints = std::max(fidelities.count("ghz") ? fidelities.at("ghz") : 0.0,
                                      fidelities.count("plus_product") ? fidelities.at("plus_product") : 0.0);
    if (it->second > endpoints + 1e-3 && it->second > best) {
      best = it->second;
      best_label = "ghz_plus";
    }
  }
  return best > threshold ? best_label : "other";
}

}  // namespace qdmag
