#pragma once

#include <string>

#include "wptrx/config.hpp"

namespace wptrx {

/// Runs one subcommand against a finalized config, writing this command's
/// CSVs/reports into out_dir. Returns a one-line summary for stdout.
/// Throws std::invalid_argument for an unknown command.
std::string dispatch(const std::string& command, const ToolConfig& cfg,
                     const std::string& out_dir);

/// Full argv entry point used by the `wptrx` binary:
///   wptrx <command> --config <path> [--out <dir>] [--override key=value ...]
/// Output dir precedence: --out, then $WPTRX_OUT, then config out.dir.
int run_cli(int argc, char** argv);

}  // namespace wptrx
