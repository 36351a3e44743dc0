#pragma once

// The annulus-dyn subcommands. Each writes its data to the output path
// (or to the given stream when no path is set) and, with a path, the
// resolved configuration to <out>.config.json.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "annulus/cli/config.hpp"

namespace annulus::cli {

struct Invocation {
  /// Fully resolved configuration.
  RunConfig config;
  std::optional<std::filesystem::path> out;
  unsigned threads = 1;
  /// Command line recorded in the metadata, without --out and --threads.
  std::string command_line;
};

/// Exit codes of the tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDomainError = 3, kConvergenceError = 4 };

/// Runs inv.config.command.
void run(const Invocation& inv, std::ostream& console);

std::string version();

}  // namespace annulus::cli
