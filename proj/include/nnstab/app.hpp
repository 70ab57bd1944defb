#pragma once

// Experiment orchestration behind the command-line tool: builds result tables
// for each subcommand and writes them next to a run manifest.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nnstab/config.hpp"
#include "nnstab/montecarlo.hpp"
#include "nnstab/report.hpp"

namespace nnstab {

enum class Subcommand { bounds, estimate, stable_region, sweep, check };

std::string_view to_string(Subcommand s);
std::optional<Subcommand> subcommand_from_string(std::string_view s);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 1;
inline constexpr int runtime = 2;
inline constexpr int check_failed = 3;
}  // namespace exit_code

/// Column layouts shared by the emitters and the tests.
std::vector<std::string> result_columns();
std::vector<std::string> bound_columns();
std::vector<std::string> check_columns();
std::vector<std::string> acceptance_columns();

struct RunOutput {
    Table table;
    std::vector<std::pair<std::string, double>> timings;
    bool check_failed = false;
    /// Set when a sweep stopped early; the table then carries a truncation marker.
    std::optional<std::string> runtime_error;
};

/// Runs one subcommand in memory. `config` may be empty only for `check`,
/// which then runs the full validity battery.
RunOutput execute(Subcommand sub, const std::optional<RunConfig>& config, const Execution& exec);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    Format format = Format::csv;
    Execution exec;
    std::optional<std::uint64_t> seed;  // overrides the config seed
    std::ostream* out = nullptr;        // results when out_dir is unset; default std::cout
    std::ostream* err = nullptr;        // manifest and error objects; default std::cerr
};

/// Parses, validates, runs and writes. Never throws; returns an exit code and
/// reports failures as {"error": {...}} on the error stream.
int run(Subcommand sub, const std::optional<std::filesystem::path>& config_path,
        const RunOptions& options);

/// Machine-readable error object.
std::string error_json(std::string_view kind, std::string_view message,
                       const std::vector<std::string>& violations = {});

}  // namespace nnstab
