#pragma once

#include "deadcore/fraclap.hpp"
#include "deadcore/grid.hpp"
#include "deadcore/profiles.hpp"
#include "deadcore/solver.hpp"

#include <array>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace deadcore {

// ---------------------------------------------------------------------------
// Dead cores

struct DeadCoreInterval {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t first_node = 0;
    std::size_t last_node = 0;
};

struct DeadCoreReport {
    std::vector<DeadCoreInterval> intervals; ///< disjoint, sorted
    double measure = 0.0;                    ///< sum of (hi - lo)

    bool empty() const noexcept { return intervals.empty(); }
};

/// Maximal runs of consecutive interior nodes with |u_i| <= tau.
DeadCoreReport detect_dead_core(const GridFunction& u, double tau);

// ---------------------------------------------------------------------------
// Branching points

struct BranchingCandidate {
    std::size_t node = 0;
    double x0 = 0.0;
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
};

struct BranchingTolerances {
    double tau0 = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

/// 10 (h^beta, h^(beta-1), h^(beta-2)) with beta = 2s/(1-gamma); s = 1 gives the local rate.
BranchingTolerances default_branching_tolerances(double h, double s, double gamma);

struct BranchingReport {
    /// Every interior node passing the threshold tests.
    std::vector<BranchingCandidate> candidates;
    /// One node per run of consecutive candidates: the one with the smallest |u|.
    std::vector<BranchingCandidate> points;
    BranchingTolerances tolerances;
    int nu = 2;
    /// Set when u vanishes on every interior node ("identically-zero candidate").
    bool degenerate = false;
};

/// nu = 1 tests |u| and |Du|; nu = 2 also tests |D^2 u|.
BranchingReport detect_branching(const GridFunction& u, int nu, const BranchingTolerances& tol);

/// Returns a warning when nu does not match the regime of exponent_table(s, gamma).
std::optional<std::string> branching_mode_warning(int nu, double s, double gamma);

// ---------------------------------------------------------------------------
// Growth exponents

struct FitWindow {
    double r_min = 0.0;
    double r_max = 0.0;
    int count = 8;
};

/// r_min = 8h, r_max = a/4, 8 radii.
FitWindow default_fit_window(const Grid& grid);

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> radii; ///< strictly increasing lattice multiples
    std::vector<double> sups;
    double target = std::numeric_limits<double>::quiet_NaN();
    double relative_gap = std::numeric_limits<double>::quiet_NaN();
    /// Leading coefficient of a quadratic fit in log r; zero for a pure power.
    double curvature = 0.0;
};

/// Least-squares line through (log r_j, log sup_{B_{r_j}(x0)} |D^order u|). The
/// geometric radii are rounded to lattice multiples of h, so pure powers are fitted
/// without quantization error when x0 is a node.
ExponentFit fit_growth_exponent(const GridFunction& u, double x0, const FitWindow& window, int deriv_order,
                                double target = std::numeric_limits<double>::quiet_NaN());

ExponentFit fit_growth_exponent(const GridFunction& u, double x0, double r_min, double r_max, int k,
                                int deriv_order);

// ---------------------------------------------------------------------------
// Blow-up

/// v_r(x) = u(x0 + r x) / r^{2s/(1-gamma)} on the nodes of u's grid, by linear
/// interpolation. s may be 1 (local rate). The tail of v_r is zero.
GridFunction blow_up(const GridFunction& u, double x0, double r, double s, double gamma);

/// Same rescaling applied to a closed-form function, sampled exactly.
GridFunction blow_up(const ScalarFunction& u, const GridPtr& grid, double x0, double r, double s, double gamma);

// ---------------------------------------------------------------------------
// Comparison principle

struct ComparisonResult {
    bool holds = false;
    double max_violation = 0.0; ///< max over interior nodes of (u2 - u1)_+
    SolveReport upper;
    SolveReport lower;
};

/// Solves with g1 >= g2 and checks u1 >= u2 - 10 residual_tol on the interior.
/// Throws UnorderedData if g1 < g2 anywhere, NonConvergence if either solve fails.
ComparisonResult comparison_check(const FracLapOperator& op, const ReactionSpec& spec, const GridFunction& g1,
                                  const GridFunction& g2, const SolverConfig& cfg = {});

/// The one named generator behind every randomized campaign.
using Rng = std::mt19937_64;

struct OrderedPair {
    GridFunction upper;
    GridFunction lower;
};

/// Smooth bounded exterior data g1 (random cosine modes under a cutoff that
/// vanishes at R, plus a constant even tail) and g2 = g1 - d with a random
/// non-negative smooth gap d. Interior values are zero.
OrderedPair random_ordered_pair(const GridPtr& grid, Rng& rng);

// ---------------------------------------------------------------------------
// Liouville probe

enum class GrowthClass { Decaying, Critical, Growing };

std::string_view to_string(GrowthClass c) noexcept;

struct LiouvilleReport {
    std::vector<double> radii;
    std::vector<double> q; ///< sup_{B_R}|u| / R^{2s/(1-gamma)}
    GrowthClass classification = GrowthClass::Growing;
    bool assertion_checked = false;
    bool assertion_passed = true;
    double sup_abs = 0.0; ///< sup over the largest ball
};

struct LiouvilleOptions {
    /// Per-doubling decay factor separating "decaying" from "critical".
    double decay_factor = 1.1;
    /// Only solver outputs are held to the smallness conclusion.
    bool solver_output = false;
    double smallness_tol = 1e-6;
};

LiouvilleReport liouville_probe(const GridFunction& u, double s, double gamma, const std::vector<double>& radii,
                                const LiouvilleOptions& opts = {});

// ---------------------------------------------------------------------------
// One-phase free boundary

struct FreeBoundaryCheck {
    bool holds = false;
    double x_star = 0.0;
    BranchingTolerances tolerances;
    std::vector<BranchingCandidate> nodes; ///< nodes within h of x_star
};

/// Thresholds 10 (h^beta, h^(beta-1), h^(beta-2)) with beta = 2/(1-gamma) at the
/// nodes within one cell of x_star.
FreeBoundaryCheck one_phase_branching_check(const GridFunction& u, double x_star, double gamma);

/// Uses report.free_boundary; throws NoFreeBoundary when the solve found none.
FreeBoundaryCheck one_phase_branching_check(const SolveReport& report, double gamma);

// ---------------------------------------------------------------------------
// Critical amplitude

/// Generic odd data produces either a nearly dead core or a linear crossing at 0.
/// The amplitude at which x = 0 becomes a branching point is located by bisection
/// on the sign of the log-log curvature of sup_{B_r}|u|: the top of the bracket
/// must show a convex (linear crossing) profile, the search steps down by
/// scan_factor until the curvature turns non-positive and then bisects.
struct CalibrationResult {
    double amplitude = 0.0;
    ExponentFit fit;
    ExponentFit gradient_fit;
    SolveReport report;
    int solves = 0;
};

struct CalibrationOptions {
    double lo = 0.1;
    double hi = 1.0;
    double scan_factor = 0.8;
    int bisections = 24;
    std::optional<FitWindow> window; ///< default_fit_window when empty
};

CalibrationResult calibrate_branching_amplitude(const FracLapOperator& op, const OddExteriorData& data,
                                                const ReactionSpec& spec, const SolverConfig& cfg,
                                                const CalibrationOptions& opts = {});

// ---------------------------------------------------------------------------
// s -> 1 limit

struct SLimitRow {
    double s = 0.0;
    double distance = 0.0;
    double slope = std::numeric_limits<double>::quiet_NaN();
};

struct SLimitOptions {
    /// Fit the exponent at 0 on a solve with calibrated amplitude (one calibration per s).
    bool fit_slopes = true;
    CalibrationOptions calibration;
    QuadratureConfig quadrature;
};

/// For each s: d(s) = sup over interior nodes of |u_s - u_local|, where u_local
/// solves u'' = f(u) with boundary values (g(-a), g(a)).
std::vector<SLimitRow> s_limit_study(const GridPtr& grid, const OddExteriorData& data, const ReactionSpec& spec,
                                     const std::vector<double>& s_list, const SolverConfig& cfg = {},
                                     const SLimitOptions& opts = {});

} // namespace deadcore
