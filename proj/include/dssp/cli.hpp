#ifndef DSSP_CLI_HPP_
#define DSSP_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "dssp/core.hpp"
#include "dssp/simnet.hpp"

namespace dssp {

/// Exit codes, one per failure class.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitBadConfig = 2,
  kExitDeadlock = 3,
  kExitDivergence = 4,
  kExitIncomplete = 5,
  kExitProtocol = 6,
};

/// Runs a validated config in its configured mode.
RunResult execute(const ExperimentConfig& config, std::optional<double> deadline_s = std::nullopt);

/// Header of the compare / sweep-ssp tables.
std::string comparison_csv_header();
std::string comparison_csv_row(const ExperimentConfig& config, const MetricsReport& report);

/// Subcommands: run, compare, sweep-ssp, check. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace dssp

#endif  // DSSP_CLI_HPP_
