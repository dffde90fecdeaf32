#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "curvband/config.hpp"

namespace curvband {

enum class Command { geometry, gauge_check, spectrum, evolve };

std::string_view to_string(Command command);
/// "geometry", "gauge-check", "spectrum", "evolve"; throws std::invalid_argument.
Command parse_command(std::string_view text);

struct RunResult {
    int exit_code = 0;
    std::string summary;  // contents of summary.txt
    std::vector<std::filesystem::path> files;
    std::string error;
};

/// Runs one scenario and writes summary.txt plus the command's CSV files into
/// config.output_path. Never throws; failures set a nonzero exit code.
RunResult run_command(const RunConfig& config, Command command);

/// Parallelism cap for per-m solves, from CURVBAND_THREADS when set.
unsigned thread_budget();

}  // namespace curvband
