#include "runner/config.hpp"
#include "runner/runner.hpp"

#include "deadcore/analysis.hpp"
#include "deadcore/error.hpp"
#include "deadcore/fraclap.hpp"
#include "deadcore/io.hpp"
#include "deadcore/profiles.hpp"
#include "deadcore/solver.hpp"

#include "../unit/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace deadcore;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGetoorTol = 5e-3;
constexpr double kGetoorRatio = 1.8;
constexpr double kGetoorSeconds = 10.0;
constexpr double kLocalProfileFactor = 5.0; // error <= 5 h^1.5
constexpr double kLocalSeconds = 5.0;
constexpr double kLocalSlopeTol = 0.02;
constexpr double kNonlocalSlopeTol = 0.10;
constexpr double kNonlocalSeconds = 120.0;
constexpr double kGradientSlopeTol = 0.10;
constexpr int kComparisonPairs = 100;
constexpr double kComparisonSeconds = 300.0;
constexpr double kSelfSimilarTol = 1e-10;
constexpr double kBlowUpBoundFactor = 2.0; // sup_{B_1}|v_r| <= 2 exp(intercept)
constexpr double kFreeBoundaryCells = 4.0;
constexpr double kNonlocalCoreTau = 1e-12;

constexpr double kGamma = 0.2;
const ReactionSpec kTwoPhase{kGamma, ReactionMode::TwoPhase, 0.0};
const ReactionSpec kOnePhase{kGamma, ReactionMode::OnePhase, 0.0};

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

void info(const std::string& text) {
    std::printf("     # %s\n", text.c_str());
    std::fflush(stdout);
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridPtr grid(double h, double a = 1.0, double R = 8.0) { return make_grid(GridSpec{a, R, h}); }

template <typename F>
void guarded(int id, const std::string& what, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, what, std::string("error: ") + e.what());
    }
}

double getoor_error(double h, double radius) {
    const auto g = grid(h);
    const FracLapOperator op = assemble(g, 0.5);
    const GridFunction u = sample([](double x) { return std::sqrt(std::max(0.0, 1.0 - x * x)); }, g);
    const GridFunction v = apply(op, u);
    double err = 0.0;
    for (const auto i : g->interior()) {
        if (std::abs(g->x(i)) <= radius) {
            err = std::max(err, std::abs(v.values[i] - 1.0));
        }
    }
    return err;
}

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const double h = 1.0 / 256;
    const double e1 = getoor_error(h, 1.0);
    const double e2 = getoor_error(h / 2, 1.0);
    const double elapsed = seconds_since(t0);
    const bool pass = e1 <= kGetoorTol && e1 / e2 >= kGetoorRatio && elapsed <= kGetoorSeconds;
    report(1, pass, "Getoor pair on (-1,1)",
           "sup error " + num(e1) + " (tol " + num(kGetoorTol) + "), ratio " + num(e1 / e2) + " (min " +
               num(kGetoorRatio) + "), " + num(elapsed, 3) + " s");
    const double c1 = getoor_error(h, 0.5), c2 = getoor_error(h / 2, 0.5);
    info("on |x| <= 1/2: error " + num(c1) + ", ratio " + num(c1 / c2));
}

struct LocalRun {
    GridPtr grid;
    SolveReport report;
    double seconds = 0.0;
};

LocalRun local_two_phase(double h) {
    const auto t0 = std::chrono::steady_clock::now();
    const LocalProfile p = exact_local_profile(kGamma);
    LocalRun run{grid(h), {}, 0.0};
    run.report = solve_local(run.grid, {p(-1.0), p(1.0)}, kTwoPhase);
    run.seconds = seconds_since(t0);
    return run;
}

void criterion_2(const LocalRun& run) {
    const LocalProfile p = exact_local_profile(kGamma);
    const double h = run.grid->h();
    double err = 0.0;
    for (const auto i : run.grid->interior()) {
        err = std::max(err, std::abs(run.report.u.values[i] - p(run.grid->x(i))));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < run.report.trace.size(); ++k) {
        monotone = monotone && run.report.trace[k].energy <= run.report.trace[k - 1].energy;
    }
    const double bound = kLocalProfileFactor * std::pow(h, 1.5);
    const bool pass = run.report.converged && err <= bound && monotone && run.seconds <= kLocalSeconds;
    report(2, pass, "local two-phase solve vs closed-form profile",
           "h = 2^-10, sup error " + num(err) + " (bound " + num(bound) + "), energy " +
               (monotone ? "non-increasing" : "increased") + " over " + std::to_string(run.report.iterations) +
               " iterations, " + num(run.seconds, 3) + " s");
}

void criterion_3(const LocalRun& run) {
    const double h = run.grid->h();
    const BranchingReport br =
        detect_branching(run.report.u, 2, default_branching_tolerances(h, 1.0, kGamma));
    require(!br.points.empty(), ErrorCode::NoFreeBoundary, "no branching point detected");
    const BranchingCandidate* best = &br.points.front();
    for (const auto& c : br.points) {
        best = std::abs(c.x0) < std::abs(best->x0) ? &c : best;
    }
    const double target = growth_exponent(1.0, kGamma);
    const ExponentFit fit = fit_growth_exponent(run.report.u, best->x0, default_fit_window(*run.grid), 0, target);
    const bool pass = std::abs(fit.relative_gap) <= kLocalSlopeTol;
    report(3, pass, "local sharp exponent at the branching point",
           "x0 = " + num(best->x0) + ", slope " + num(fit.slope) + " vs " + num(target) + " (gap " +
               num(100 * fit.relative_gap, 3) + "%, tol 2%)");
}

struct NonlocalRun {
    CalibrationResult cal;
    double x0 = 0.0;
    ExponentFit fit;
    ExponentFit gradient_fit;
    double seconds = 0.0;
};

NonlocalRun nonlocal_ramp() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = grid(1.0 / 512);
    const FracLapOperator op = assemble(g, 0.95);
    CalibrationOptions opts;
    opts.lo = 1.0;
    opts.hi = 64.0;
    NonlocalRun run;
    run.cal = calibrate_branching_amplitude(op, odd_exterior_builder(OddShape::Ramp, 1.0), kTwoPhase, {}, opts);
    const BranchingReport br =
        detect_branching(run.cal.report.u, 2, default_branching_tolerances(g->h(), 0.95, kGamma));
    for (const auto& c : br.points) {
        run.x0 = (&c == &br.points.front() || std::abs(c.x0) < std::abs(run.x0)) ? c.x0 : run.x0;
    }
    const ExponentTable t = exponent_table(0.95, kGamma);
    run.fit = fit_growth_exponent(run.cal.report.u, run.x0, default_fit_window(*g), 0, t.target);
    run.gradient_fit = fit_growth_exponent(run.cal.report.u, run.x0, default_fit_window(*g), 1, t.gradient_target);
    run.seconds = seconds_since(t0);
    info("ramp amplitude calibrated to " + num(run.cal.amplitude, 6) + " with " + std::to_string(run.cal.solves) +
         " solves; " + std::to_string(br.points.size()) + " branching point(s)");
    return run;
}

void criterion_4(const NonlocalRun& run) {
    const ExponentTable t = exponent_table(0.95, kGamma);
    const bool pass = std::abs(run.fit.relative_gap) <= kNonlocalSlopeTol && run.fit.slope > t.schauder &&
                      run.seconds <= kNonlocalSeconds;
    report(4, pass, "nonlocal sharp exponent (s = 0.95, ramp)",
           "x0 = " + num(run.x0) + ", slope " + num(run.fit.slope) + " vs " + num(t.target) + " (gap " +
               num(100 * run.fit.relative_gap, 3) + "%, tol 10%), Schauder " + num(t.schauder) + ", " +
               num(run.seconds, 3) + " s");
}

void criterion_5(const NonlocalRun& run) {
    const double target = exponent_table(0.95, kGamma).gradient_target;
    const bool pass = std::abs(run.gradient_fit.relative_gap) <= kGradientSlopeTol;
    report(5, pass, "nonlocal gradient growth (s = 0.95, ramp)",
           "slope " + num(run.gradient_fit.slope) + " vs " + num(target) + " (gap " +
               num(100 * run.gradient_fit.relative_gap, 3) + "%, tol 10%)");
}

void plateau_reference() {
    const auto g = grid(1.0 / 512);
    const FracLapOperator op = assemble(g, 0.95);
    CalibrationOptions opts;
    opts.lo = 0.01;
    opts.hi = 4.0;
    const CalibrationResult cal =
        calibrate_branching_amplitude(op, odd_exterior_builder(OddShape::Plateau, 1.0), kTwoPhase, {}, opts);
    const ExponentFit f = fit_growth_exponent(cal.report.u, 0.0, default_fit_window(*g), 0);
    const ExponentFit df = fit_growth_exponent(cal.report.u, 0.0, default_fit_window(*g), 1);
    info("plateau data, amplitude " + num(cal.amplitude, 6) + ": slope " + num(f.slope) + ", gradient slope " +
         num(df.slope));
}

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = grid(1.0 / 128);
    const FracLapOperator op = assemble(g, 0.95);
    Rng rng(0);
    int violations = 0;
    double worst = 0.0;
    for (int k = 0; k < kComparisonPairs; ++k) {
        const OrderedPair pair = random_ordered_pair(g, rng);
        const ComparisonResult res = comparison_check(op, kTwoPhase, pair.upper, pair.lower);
        violations += res.holds ? 0 : 1;
        worst = std::max(worst, res.max_violation);
    }
    const double elapsed = seconds_since(t0);
    const bool pass = violations == 0 && elapsed <= kComparisonSeconds;
    report(6, pass, "comparison principle on random ordered pairs",
           std::to_string(kComparisonPairs) + " pairs (seed 0, h = 2^-7), " + std::to_string(violations) +
               " violations, max (u2 - u1)+ = " + num(worst) + ", " + num(elapsed, 3) + " s");
}

void criterion_7(const NonlocalRun& run) {
    const auto g = grid(1.0 / 64);
    const LocalProfile p = exact_local_profile(kGamma);
    const ScalarFunction f = [p](double x) { return p(x); };
    const GridFunction v1 = blow_up(f, g, 0.0, 1.0, 1.0, kGamma);
    double self = 0.0;
    for (const double r : {0.5, 0.25, 0.125}) {
        const GridFunction vr = blow_up(f, g, 0.0, r, 1.0, kGamma);
        for (std::size_t i = 0; i < g->size(); ++i) {
            self = std::max(self, std::abs(vr.values[i] - v1.values[i]));
        }
    }
    const double bound = kBlowUpBoundFactor * std::exp(run.fit.intercept);
    double lo = INFINITY, hi = 0.0;
    for (const double r : {0.5, 0.25, 0.125}) {
        const GridFunction vr = blow_up(run.cal.report.u, run.x0, r, 0.95, kGamma);
        const double sup = sup_on_ball(vr, 0.0, 1.0);
        lo = std::min(lo, sup);
        hi = std::max(hi, sup);
    }
    const bool pass = self <= kSelfSimilarTol && hi <= bound;
    report(7, pass, "blow-up self-similarity",
           "profile |v_r - v_1| = " + num(self) + " (tol 1e-10); nonlocal sup_B1 |v_r| in [" + num(lo) + ", " +
               num(hi) + "] <= " + num(bound) + " = 2 exp(intercept)");
}

void criterion_8() {
    // (a) and (b): local one-phase, u(-4) = 0, u(4) = 1
    const double a = 4.0, h = 1.0 / 256;
    const auto g = grid(h, a, 8.0);
    const SolveReport local = solve_local(g, {0.0, 1.0}, kOnePhase);
    const DeadCoreReport core = detect_dead_core(local.u, 1e-12);
    const double x_star = oracle::shooting_free_boundary(kGamma, a, 1.0, -a);
    const double fb = local.free_boundary.value_or(NAN);
    const bool a_ok = local.converged && !core.empty() && std::abs(fb - x_star) <= kFreeBoundaryCells * h;
    const FreeBoundaryCheck check = one_phase_branching_check(local, kGamma);

    // (c): nonlocal one-phase with small nonnegative even data u = 1e-3 outside (-1, 1)
    const auto gn = grid(1.0 / 256);
    const FracLapOperator op = assemble(gn, 0.95);
    std::vector<double> v(gn->size(), 0.0);
    for (const auto i : gn->exterior()) {
        v[i] = 1e-3;
    }
    const SolveReport nonlocal = solve(op, GridFunction(gn, v, TailModel::constant(1e-3)), kOnePhase);
    const DeadCoreReport ncore = detect_dead_core(nonlocal.u, kNonlocalCoreTau);
    const bool c_ok = nonlocal.converged && !ncore.empty();

    report(8, a_ok && check.holds && c_ok, "one-phase dead core and free-boundary branching",
           "(a) free boundary " + num(fb, 6) + " vs shooting " + num(x_star, 6) + " (tol 4h = " + num(4 * h) +
               "), core measure " + num(core.measure) + "; (b) thresholds " + (check.holds ? "pass" : "fail") +
               " at " + std::to_string(check.nodes.size()) + " nodes; (c) s = 0.95, g = 1e-3: core measure " +
               num(ncore.measure) + " at tau = 1e-12");
}

void criterion_9() {
    const auto g = grid(1.0 / 512);
    SLimitOptions opts;
    opts.calibration.lo = 0.01;
    opts.calibration.hi = 4.0;
    const auto rows = s_limit_study(g, odd_exterior_builder(OddShape::Plateau, 0.25), kTwoPhase, {0.9, 0.95, 0.99},
                                    {}, opts);
    bool decreasing = true, toward = true;
    std::string table;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k > 0) {
            decreasing = decreasing && rows[k].distance < rows[k - 1].distance;
            toward = toward && rows[k].slope > rows[k - 1].slope &&
                     std::abs(2.5 - rows[k].slope) < std::abs(2.5 - rows[k - 1].slope);
        }
        table += (k ? "; " : "") + std::string("s = ") + num(rows[k].s, 3) + ": d = " + num(rows[k].distance) +
                 ", slope " + num(rows[k].slope);
    }
    report(9, decreasing && toward, "s -> 1 limit (plateau data)", table);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream s;
            s << in.rdbuf();
            files[fs::relative(e.path(), dir).string()] = s.str();
        }
    }
    return files;
}

void criterion_10() {
    const fs::path root = fs::temp_directory_path() / "deadcore_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream(root / "exponent.cfg") << "s = 0.95\ngamma = 0.2\nshape = ramp\namplitude = 16\nh = 0.0078125\n";
        std::ofstream(root / "compare.cfg") << "h = 0.0078125\npairs = 10\n";
    }
    std::ostringstream log;
    int code = 0;
    for (const std::string run : {"first", "second"}) {
        runner::RunOptions opts;
        opts.out = root / run / "exponent";
        code = std::max(code, runner::run_file(root / "exponent.cfg", runner::Mode::Exponent, opts, log));
        opts.out = root / run / "compare";
        code = std::max(code, runner::run_file(root / "compare.cfg", runner::Mode::Compare, opts, log));
    }
    const auto first = snapshot(root / "first");
    const auto second = snapshot(root / "second");
    std::size_t csvs = 0;
    for (const auto& [name, _] : first) {
        csvs += name.ends_with(".csv") ? 1 : 0;
    }
    const bool pass = code == 0 && csvs == 5 && first == second;
    report(10, pass, "determinism",
           std::to_string(first.size()) + " artifacts (" + std::to_string(csvs) + " CSV) from exponent and compare runs " +
               (first == second ? "byte-identical" : "differ") + ", exit code " + std::to_string(code));
    fs::remove_all(root);
}

} // namespace

int main() {
    guarded(1, "Getoor pair on (-1,1)", criterion_1);
    LocalRun local;
    guarded(2, "local two-phase solve vs closed-form profile", [&] {
        local = local_two_phase(1.0 / 1024);
        criterion_2(local);
    });
    guarded(3, "local sharp exponent at the branching point", [&] { criterion_3(local); });
    NonlocalRun nonlocal;
    bool have_nonlocal = false;
    guarded(4, "nonlocal sharp exponent (s = 0.95, ramp)", [&] {
        nonlocal = nonlocal_ramp();
        have_nonlocal = true;
        criterion_4(nonlocal);
    });
    guarded(5, "nonlocal gradient growth (s = 0.95, ramp)", [&] {
        require(have_nonlocal, ErrorCode::NonConvergence, "nonlocal run unavailable");
        criterion_5(nonlocal);
    });
    try {
        plateau_reference();
    } catch (const std::exception& e) {
        info(std::string("plateau reference failed: ") + e.what());
    }
    guarded(6, "comparison principle on random ordered pairs", criterion_6);
    guarded(7, "blow-up self-similarity", [&] {
        require(have_nonlocal, ErrorCode::NonConvergence, "nonlocal run unavailable");
        criterion_7(nonlocal);
    });
    guarded(8, "one-phase dead core and free-boundary branching", criterion_8);
    guarded(9, "s -> 1 limit (plateau data)", criterion_9);
    guarded(10, "determinism", criterion_10);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
