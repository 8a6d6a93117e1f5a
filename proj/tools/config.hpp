#pragma once

// Run configuration: an INI-like "key = value" file with [sections].

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdmag/physics.hpp"

namespace qdmag::cli {

struct ConfigError : std::runtime_error {
  ConfigError(int line, const std::string& message);
  int line;
};

struct MaterialConfig {
  double A_total_ueV = 83.0;
  double n_phys = 1.5e6;
  double g_factor = -0.44;
  double bath_spin_s = 0.5;
};

struct SimConfig {
  int n_bath = 49;
  AlphaMode alpha_mode = AlphaMode::variance_matched;
  int quad_nodes = 64;
  int restarts = 0;  ///< 0: 30 restarts up to three dots, 60 above
  std::uint64_t seed = 20150907;
  double tol = 1e-9;
  int max_iter = 500;
};

struct PriorConfig {
  double B0_mT = 7.0;
  double dB_mT = 4.0;
};

struct SweepConfig {
  double t_start_ns = 0.1;
  double t_end_ns = 2000.0;
  int points = 200;
  bool log_spacing = true;
};

struct TransitionsConfig {
  double theta0 = 5.0;
  double theta1 = 10.0;
  double overlap = 0.9;
  double bracket_rel = 0.02;
};

struct ScanConfig {
  std::vector<int> dots_list{1, 2, 3};
  std::vector<double> B0_mT_list{0.0, 7.0, 1000.0};
  std::vector<double> dB_mT_list{1.0, 4.0};
  int product_samples = 500;
};

struct ChannelConfig {
  std::vector<double> B_mT_list{0.0, 7.0, 1000.0};
};

struct OptimizeConfig {
  double t_ns = 6.0;
};

struct RunConfig {
  int dots = 1;
  MaterialConfig material;
  SimConfig sim;
  PriorConfig prior;
  SweepConfig sweep;
  TransitionsConfig transitions;
  ScanConfig scan;
  ChannelConfig channel;
  OptimizeConfig optimize;

  int restarts_for(int n_dots) const;
  Material to_material() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form with every key present; parse_config(serialize(c))
/// reproduces c exactly.
std::string serialize(const RunConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace qdmag::cli
