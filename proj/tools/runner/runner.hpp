#pragma once

#include "config.hpp"

#include "deadcore/profiles.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace deadcore::runner {

enum ExitCode : int {
    ExitOk = 0,
    ExitValidation = 2,
    ExitNonConvergence = 3,
    ExitAnalysis = 4,
};

enum class ParamCode { Ok, NuIndeterminate, GammaOutOfRange, SOutOfRange };

std::string_view to_string(ParamCode code) noexcept;

struct ParamDiagnostic {
    ParamCode code = ParamCode::Ok;
    std::string message;
    std::optional<ExponentTable> table;

    bool ok() const noexcept { return code == ParamCode::Ok || code == ParamCode::NuIndeterminate; }
};

/// Checks gamma in (0, 1/3) and s in (1/2, 1); an s between the two regimes of
/// the nu table is reported as a warning, not an error.
ParamDiagnostic validate_params(double s, double gamma);

/// Multi-line human-readable report: code, message, and the exponent table when present.
std::string render(const ParamDiagnostic& d);

struct RunOptions {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    bool dry_run = false;
};

/// Executes one experiment, writing artifacts under cfg.out (or options.out).
/// Progress and diagnostics go to `log`. Returns an ExitCode.
int run(ExperimentConfig cfg, const RunOptions& options, std::ostream& log);

/// Loads the file and runs it; parse errors map to ExitValidation.
/// `expected` rejects configs whose `mode` key names a different subcommand.
int run_file(const std::filesystem::path& path, std::optional<Mode> expected, const RunOptions& options,
             std::ostream& log);

/// Runs every config, at most `jobs` at a time, and replays the logs in input
/// order. Returns the largest exit code.
int run_all(const std::vector<std::filesystem::path>& configs, std::optional<Mode> expected,
            const RunOptions& options, int jobs, std::ostream& log);

} // namespace deadcore::runner
