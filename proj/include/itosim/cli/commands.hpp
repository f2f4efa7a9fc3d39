#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "itosim/cli/config.hpp"

namespace itosim::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDivergence = 3 };

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> mode;
    std::optional<std::string> metric;
};

void apply(RunConfig& cfg, const Overrides& o);

/// Writes <label>_path.csv (t,state_1..state_d) per scheme, all driven by one path.
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
/// Writes <id>_levels.csv, <id>_fit.csv per scheme (and functional) plus summary.csv.
/// Returns kConfigError when a regression is degenerate and kDivergence when the
/// divergent fraction exceeds study.max_divergent_fraction.
int cmd_converge(const RunConfig& cfg, std::ostream& log);
/// Writes <experiment>.csv.
int cmd_integrals(const RunConfig& cfg, std::ostream& log);

/// Full command line: `itosim <simulate|converge|integrals> --config FILE ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itosim::cli
