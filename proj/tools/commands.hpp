#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "qdmag/boxchannel.hpp"

namespace qdmag::cli {

inline const std::vector<std::string> kCommands{"bath-table", "channel-curves", "sweep",       "optimize",
                                                "compare-n",  "prior-scan",     "transitions", "validate"};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  bool quiet = false;  ///< suppress progress lines
};

/// Runs one command, writing CSV files and a JSON sidecar into out_dir.
/// Returns the process exit status; invariant violations propagate as
/// exceptions.
int run_command(const std::string& command, const RunConfig& config, const RunOptions& options);

/// Dot model (bath and g-factor) described by the configuration.
DotModel model_of_config(const RunConfig& config);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Oracle suite behind `validate`: multiplicities, channel vs exact
/// evolution, CPTP grid, Personick residuals, Van Trees consistency and a
/// read-back of emitted rows.
std::vector<CheckResult> run_validation(const RunConfig& config, const RunOptions& options);

}  // namespace qdmag::cli
