#pragma once

// The product channel commutes with local z-rotations and with relabeling of
// the dots, so optimal states are only defined up to those symmetries. These
// helpers compare states modulo them.

#include <map>
#include <string>

#include "qdmag/quantcore.hpp"

namespace qdmag {

/// max over local phases diag(1, e^{i phi_q}) of |<target| D psi>|^2.
double phase_aligned_fidelity(const CVector& target, const CVector& psi);

/// As above, also maximized over permutations of the qubits of `psi`.
double symmetric_fidelity(const CVector& target, const CVector& psi);

/// Overlap of two states modulo local phases, qubit permutations and the
/// antiunitary global flip X^{(x)N} K.
double symmetric_overlap(const PureState& a, const PureState& b);

/// Best member n(g GHZ + (1-g)|+>^N) of the GHZ-plus family. a = g/sqrt(2)
/// and b = (1-g)/sqrt(2) are the amplitude conventions used in plots.
struct GhzPlusFit {
  double g = 1.0;
  double fidelity = 0.0;
  double a() const;
  double b() const;
};

GhzPlusFit fit_ghz_plus(const PureState& psi);

/// Fidelities with ghz, plus_product, mixed_product(k) for k < N (with zero
/// qubits allowed in either basis state) and the ghz_plus family.
std::map<std::string, double> ansatz_fidelities(const PureState& psi);

inline constexpr double kRegimeFidelity = 0.98;

/// Argmax-fidelity label if above `threshold`, else "other". The ghz_plus
/// family only wins when it beats both of its endpoints by 1e-3.
std::string regime_label(const std::map<std::string, double>& fidelities, double threshold = kRegimeFidelity);

}  // namespace qdmag
