#pragma once

#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace qdmag {

/// Half-integer quantum number stored as twice its value (spins, projections).
struct HalfInt {
  int twice = 0;

  static HalfInt from_double(double v) {
    const double t = 2.0 * v;
    if (!std::isfinite(t) || std::abs(t - std::round(t)) > 1e-9)
      throw std::invalid_argument("HalfInt: " + std::to_string(v) + " is not a multiple of 1/2");
    return HalfInt{static_cast<int>(std::lround(t))};
  }
  double value() const { return 0.5 * twice; }
  bool is_integer() const { return twice % 2 == 0; }
  auto operator<=>(const HalfInt&) const = default;
};

// Unit conversion constants: energies in micro-eV, times in ns.
inline constexpr double kBohrMagneton_ueV_per_T = 57.8838;
inline constexpr double kHbar_ueV_ns = 0.6582119;

/// Host-material parameters (GaAs defaults).
struct Material {
  double A_total_ueV = 83.0;
  double n_phys = 1.5e6;
  double g_factor = -0.44;
  HalfInt bath_spin{1};
};

/// How the per-nucleus coupling is chosen when simulating n_bath << n_phys nuclei.
enum class AlphaMode {
  literal,           ///< alpha = A / n_phys
  variance_matched,  ///< alpha = A / sqrt(n_phys * n_bath), preserves the Overhauser variance
};

AlphaMode alpha_mode_from_string(const std::string& s);
std::string to_string(AlphaMode mode);

/// Electron Larmor angular frequency Omega = -g mu_B B / hbar, rad/ns (B in Tesla).
inline double larmor_omega(double field_tesla, double g_factor) {
  return -g_factor * kBohrMagneton_ueV_per_T * field_tesla / kHbar_ueV_ns;
}

/// Per-nucleus hyperfine coupling in rad/ns.
double hyperfine_alpha(const Material& material, AlphaMode mode, int n_bath);

/// Inhomogeneous dephasing time sqrt(6 / (s(s+1) n)) / alpha, ns.
inline double t2_star(HalfInt spin, int n_bath, double alpha) {
  const double s = spin.value();
  return std::sqrt(6.0 / (s * (s + 1.0) * n_bath)) / alpha;
}

}  // namespace qdmag
