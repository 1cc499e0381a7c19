#pragma once

#include <iosfwd>
#include <string>

#include "cli/config.hpp"

namespace bagl::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kDataError = 3,
  kEstimatorError = 4,
  kInvariantError = 5,
};

/// Each command validates the whole config before touching the output
/// directory, then writes CSV artifacts, metadata.json and manifest.txt.
/// Errors are reported on `err` and mapped to an ExitCode.
int cmd_estimate(const RunConfig& cfg, std::ostream& err);
int cmd_backtest(const RunConfig& cfg, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& err);
int cmd_diagnose(const RunConfig& cfg, std::ostream& err);

/// Dispatches on the command name ("estimate", "backtest", ...).
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& err);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace bagl::cli
