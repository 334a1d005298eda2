#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adgame/cli/output.hpp"
#include "adgame/cli/scenario.hpp"

namespace adgame::cli {

enum ExitCode : int { exit_ok = 0, exit_input = 2, exit_numerical = 3, exit_unsupported = 4 };

struct RunOptions {
  std::optional<double> tol;
  std::optional<std::vector<Axis>> grid;
};

/// Each command returns its artifacts without touching the filesystem.
std::vector<Artifact> cmd_simulate(const Scenario& s, const std::filesystem::path& out,
                                   const RunOptions& opt);
std::vector<Artifact> cmd_steady(const Scenario& s, const std::filesystem::path& out,
                                 const RunOptions& opt);
/// CSV at `out` plus a summary at `out` + ".summary.json".
std::vector<Artifact> cmd_nash(const Scenario& s, const std::filesystem::path& out,
                               const RunOptions& opt);
/// JSON result, or a CSV over the grid when one is given.
std::vector<Artifact> cmd_allocate(const Scenario& s, const std::filesystem::path& out,
                                   const RunOptions& opt);
std::vector<Artifact> cmd_sweep(const Scenario& s, const std::filesystem::path& out,
                                const RunOptions& opt);

/// Parses arguments, runs, writes and maps errors to exit codes.
int run_cli(int argc, char** argv, std::ostream& err);

}  // namespace adgame::cli
