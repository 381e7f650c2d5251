#pragma once

#include "deadcore/analysis.hpp"
#include "deadcore/grid.hpp"
#include "deadcore/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deadcore {

/// %.17g, which round-trips every double.
std::string format_double(double v);

/// Grid-function CSV:
///
///     # grid=a:<a>,R:<R>,h:<h>
///     # tail=<TailModel::encode()>
///     x,u
///     <x>,<u>
///     ...
void write_grid_function_csv(const GridFunction& u, std::ostream& out);

/// Inverse of write_grid_function_csv. Throws ParseError naming the line.
GridFunction read_grid_function_csv(std::istream& in);

/// Metadata for the `key=value` sidecar written next to a solution CSV.
struct RunMetadata {
    std::optional<double> s; ///< empty for local solves
    double gamma = 0.0;
    ReactionMode mode = ReactionMode::TwoPhase;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> extra;
};

/// Keys in fixed order: s, gamma, mode, residual, iterations, energy, converged,
/// threads, seed, then free_boundary when present, then `extra` sorted by key.
void write_solve_sidecar(const SolveReport& report, const RunMetadata& meta, std::ostream& out);

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
std::map<std::string, std::string> read_sidecar(std::istream& in);

struct ExponentRow {
    double s = 0.0;
    double gamma = 0.0;
    double x0 = 0.0;
    ExponentFit fit;
};

/// Header `s,gamma,x0,slope,target,relative_gap,r2`.
void write_exponent_csv(const std::vector<ExponentRow>& rows, std::ostream& out);

/// Header `x0,u,du,d2u`, one row per candidate.
void write_branching_csv(const std::vector<BranchingCandidate>& candidates, std::ostream& out);

/// Header `s,distance,slope`.
void write_slimit_csv(const std::vector<SLimitRow>& rows, std::ostream& out);

} // namespace deadcore
