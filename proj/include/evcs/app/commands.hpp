#pragma once

// Subcommand implementations behind the `evcs` executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evcs/app/config.hpp"

namespace evcs::app {

enum ExitCode : int { kOk = 0, kConfigExit = 1, kRuntimeExit = 2, kIoExit = 3 };

struct CommandOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::string> algorithm;
    std::optional<std::filesystem::path> checkpoint;   // evaluate
    std::optional<std::size_t> lookahead;              // oracle
    std::size_t fuzz_cases = 100000;                   // fuzz
    std::vector<std::filesystem::path> runs;           // compare
    std::optional<std::size_t> window;                 // compare
};

/// Config from --config (defaults when absent) with --algorithm applied.
RunConfig resolve_config(const CommandOptions& opt);

/// (seed, output directory) pairs. With --seed the output goes straight into
/// the output directory, otherwise into seed_<n>/ per configured seed.
std::vector<std::pair<std::uint64_t, std::filesystem::path>> run_targets(const RunConfig& cfg,
                                                                         const CommandOptions& opt);

void cmd_train(const CommandOptions& opt, std::ostream& log);
void cmd_evaluate(const CommandOptions& opt, std::ostream& log);
void cmd_oracle(const CommandOptions& opt, std::ostream& log);
/// Returns false when any suite reports a violation.
bool cmd_fuzz(const CommandOptions& opt, std::ostream& log);
void cmd_compare(const CommandOptions& opt, std::ostream& log);

/// Runs one subcommand and maps exceptions to exit codes: 1 config or
/// validation error, 2 divergence or other runtime failure, 3 I/O error.
int dispatch(const std::string& command, const CommandOptions& opt, std::ostream& log, std::ostream& err);

}  // namespace evcs::app
