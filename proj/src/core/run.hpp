#pragma once

#include "config.hpp"

namespace spshape {

// Subcommand drivers. Each writes its artifacts under the output directory
// and throws ConfigError / DomainError (input problems) or SolverError.
// The CLI maps those to exit codes 2 and 3.
void cmd_solve(const RunConfig& cfg, const std::string& outdir);
void cmd_optimize(const RunConfig& cfg, const std::string& outdir);
void cmd_verify(const RunConfig& cfg, const std::string& outdir);
void cmd_monotonicity(const RunConfig& cfg, const std::string& outdir);

// shared entry point: subcommand in {"solve","optimize","verify","monotonicity"};
// returns the process exit code (0 ok, 2 config/input, 3 solver).
int run_subcommand(const std::string& subcommand, const std::string& config_path,
                   const std::string& outdir_override, std::string* error_out = nullptr);

}  // namespace spshape
