#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace deadcore::runner {

enum class Mode { Solve, SolveLocal, Exponent, Blowup, Compare, Liouville, SLimit, Validate };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view name);

/// Flat experiment description read from `key = value` files.
struct ExperimentConfig {
    Mode mode = Mode::Solve;
    bool mode_explicit = false; ///< set when the file contains a `mode` key

    // model
    double s = 0.95;
    double gamma = 0.2;
    std::string reaction = "two-phase";
    double epsilon = 0.0;

    // grid
    double a = 1.0;
    double R = 8.0;
    double h = 1.0 / 128.0;

    // exterior data: ramp | plateau | even-plateau | zero
    std::string shape = "ramp";
    double amplitude = 1.0;
    double boundary_left = 0.0;
    double boundary_right = 0.0;

    // solver
    double residual_tol = 1e-9;
    int max_iters = 100;

    // analysis
    double x0 = 0.0;
    double r_min = 0.0; ///< 0 selects 8h
    double r_max = 0.0; ///< 0 selects a/4
    int radii = 8;
    int nu = 2;
    bool calibrate = false;
    double amplitude_lo = 0.1;
    double amplitude_hi = 1.0;
    std::vector<double> blowup_radii{0.5, 0.25, 0.125};
    std::vector<double> probe_radii{0.0625, 0.125, 0.25, 0.5};
    std::vector<double> s_list{0.9, 0.95, 0.99};
    int pairs = 100;

    std::uint64_t seed = 0;
    std::filesystem::path out = ".";
};

/// Parses `key = value` lines with `#` comments. Unknown keys, duplicates and
/// malformed values throw Error(ParseError) whose message starts with "line N:".
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering, used for --dry-run and metadata.
std::map<std::string, std::string> describe(const ExperimentConfig& cfg);

} // namespace deadcore::runner
