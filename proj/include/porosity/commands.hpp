#pragma once

#include <cstdint>
#include <string>

#include "porosity/config.hpp"

namespace porosity {

inline constexpr const char* kSchemaVersion = "1.0.0";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { exit_pass = 0, exit_math_failure = 1, exit_config_error = 2, exit_undetermined = 3 };

struct CommandOptions {
    unsigned jobs = 1;
    bool strict = false;
    /// Record wall-clock time; off by default so reports are byte-stable.
    bool timing = false;
};

struct CommandResult {
    Json report;
    int exit_code = exit_pass;
};

CommandResult cmd_identity(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_analyze(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_entropy(const RunConfig& config, const CommandOptions& options);

struct LemmaOptions {
    std::uint64_t adaptive_budget = 400000;
    std::uint64_t samples = 10000000;
    std::uint64_t seed = 0;
};

/// Boundary integral against the closed-form constant, d = 1..3, sides 1, 1/2, 1/4.
CommandResult cmd_lemma(const LemmaOptions& lemma, const CommandOptions& options);

/// Report text: pretty JSON, or the CSV projection of frames[].conditions[].
std::string render(const Json& report, const std::string& format);

}  // namespace porosity
