#include "qdmag/physics.hpp"

namespace qdmag {

AlphaMode alpha_mode_from_string(const std::string& s) {
  if (s == "literal") return AlphaMode::literal;
  if (s == "variance_matched") return AlphaMode::variance_matched;
  throw std::invalid_argument("unknown alpha mode '" + s + "' (expected literal|variance_matched)");
}

std::string to_string(AlphaMode mode) {
  return mode == AlphaMode::literal ? "literal" : "variance_matched";
}

double hyperfine_alpha(const Material& material, AlphaMode mode, int n_bath) {
  if (n_bath < 1) throw std::invalid_argument("hyperfine_alpha: n_bath must be >= 1");
  if (material.A_total_ueV <= 0.0 || material.n_phys <= 0.0)
    throw std::invalid_argument("hyperfine_alpha: material constants must be positive");
  const double total = material.A_total_ueV / kHbar_ueV_ns;  // rad/ns
  switch (mode) {
    case AlphaMode::literal:
      return total / material.n_phys;
    case AlphaMode::variance_matched:
      return total / std::sqrt(material.n_phys * n_bath);
  }
  throw std::invalid_argument("hyperfine_alpha: bad mode");
}

}  // namespace qdmag
