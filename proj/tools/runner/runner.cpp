#include "runner.hpp"

#include "deadcore/analysis.hpp"
#include "deadcore/error.hpp"
#include "deadcore/fraclap.hpp"
#include "deadcore/io.hpp"
#include "deadcore/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace deadcore::runner {

namespace fs = std::filesystem;

namespace {

struct Context {
    ExperimentConfig cfg;
    fs::path out;
    std::ostream& log;
};

GridPtr grid_of(const ExperimentConfig& c) { return make_grid(GridSpec{c.a, c.R, c.h}); }

ReactionSpec reaction_of(const ExperimentConfig& c) {
    ReactionSpec spec;
    spec.gamma = c.gamma;
    spec.mode = parse_reaction_mode(c.reaction);
    spec.epsilon = c.epsilon;
    return spec;
}

SolverConfig solver_of(const ExperimentConfig& c) {
    SolverConfig cfg;
    cfg.residual_tol = c.residual_tol;
    cfg.max_iters = c.max_iters;
    return cfg;
}

bool is_odd_shape(const std::string& shape) { return shape == "ramp" || shape == "plateau"; }

OddExteriorData odd_data(const ExperimentConfig& c) {
    return odd_exterior_builder(parse_odd_shape(c.shape), c.amplitude, c.a);
}

GridFunction exterior_data(const ExperimentConfig& c, const GridPtr& grid) {
    if (is_odd_shape(c.shape)) {
        return odd_data(c).on(grid);
    }
    if (c.shape == "zero") {
        return GridFunction(grid, std::vector<double>(grid->size(), 0.0), TailModel::zero());
    }
    if (c.shape == "even-plateau") {
        std::vector<double> v(grid->size(), 0.0);
        for (const auto i : grid->exterior()) {
            v[i] = c.amplitude;
        }
        return GridFunction(grid, std::move(v), TailModel::constant(c.amplitude));
    }
    fail(ErrorCode::InvalidArgument, "unknown shape '" + c.shape + "'");
}

FitWindow window_of(const ExperimentConfig& c, const Grid& grid) {
    FitWindow w = default_fit_window(grid);
    if (c.r_min > 0.0) {
        w.r_min = c.r_min;
    }
    if (c.r_max > 0.0) {
        w.r_max = c.r_max;
    }
    w.count = c.radii;
    return w;
}

bool needs_s(Mode m) { return m != Mode::SolveLocal; }

/// Everything that can be checked without computing.
void check(const ExperimentConfig& c) {
    validate(GridSpec{c.a, c.R, c.h});
    validate(reaction_of(c));
    validate(solver_of(c));
    if (needs_s(c.mode) && c.mode != Mode::SLimit) {
        const ParamDiagnostic d = validate_params(c.s, c.gamma);
        require(d.ok(), ErrorCode::InvalidArgument, d.message);
    }
    if (c.mode == Mode::SLimit) {
        for (const double s : c.s_list) {
            const ParamDiagnostic d = validate_params(s, c.gamma);
            require(d.ok(), ErrorCode::InvalidArgument, d.message);
        }
        require(is_odd_shape(c.shape), ErrorCode::InvalidArgument, "slimit needs an odd shape (ramp or plateau)");
    }
    if (c.mode == Mode::Exponent || c.mode == Mode::Blowup) {
        require(is_odd_shape(c.shape) || !c.calibrate, ErrorCode::InvalidArgument,
                "amplitude calibration needs an odd shape (ramp or plateau)");
    }
    if (c.shape != "zero" && c.shape != "even-plateau") {
        (void)parse_odd_shape(c.shape);
    }
    require(c.nu == 1 || c.nu == 2, ErrorCode::InvalidArgument, "nu must be 1 or 2");
    require(c.radii >= 4, ErrorCode::InvalidArgument, "radii must be at least 4");
    require(c.pairs >= 1, ErrorCode::InvalidArgument, "pairs must be positive");
    require(c.amplitude_lo > 0.0 && c.amplitude_hi > c.amplitude_lo, ErrorCode::InvalidArgument,
            "amplitude bracket must satisfy 0 < amplitude_lo < amplitude_hi");
    for (const double r : c.blowup_radii) {
        require(r > 0.0 && r <= 1.0, ErrorCode::InvalidArgument, "blow-up radii must lie in (0, 1]");
    }
}

std::ofstream open(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    return f;
}

/// `<name>.meta` next to a table: the full config plus result keys.
void write_meta(const Context& ctx, const std::string& name, const std::map<std::string, std::string>& extra) {
    std::map<std::string, std::string> keys = describe(ctx.cfg);
    keys.erase("out");
    for (const auto& [k, v] : extra) {
        keys[k] = v;
    }
    auto f = open(ctx.out / (name + ".meta"));
    for (const auto& [k, v] : keys) {
        f << k << '=' << v << '\n';
    }
}

void write_solution(const Context& ctx, const SolveReport& rep, std::optional<double> s,
                    std::map<std::string, std::string> extra = {}) {
    {
        auto f = open(ctx.out / "solution.csv");
        write_grid_function_csv(rep.u, f);
    }
    RunMetadata meta;
    meta.s = s;
    meta.gamma = ctx.cfg.gamma;
    meta.mode = parse_reaction_mode(ctx.cfg.reaction);
    meta.seed = ctx.cfg.seed;
    if (s) {
        extra["shape"] = ctx.cfg.shape;
        extra["amplitude"] = format_double(ctx.cfg.amplitude);
    }
    meta.extra = std::move(extra);
    auto f = open(ctx.out / "solution.meta");
    write_solve_sidecar(rep, meta, f);
}

void require_converged(const SolveReport& rep) {
    require(rep.converged, ErrorCode::NonConvergence,
            "solver stopped after " + std::to_string(rep.iterations) + " iterations at residual " +
                format_double(rep.residual_inf));
}

void log_solve(const Context& ctx, const SolveReport& rep) {
    ctx.log << "  residual " << format_double(rep.residual_inf) << " after " << rep.iterations << " iterations"
            << (rep.converged ? "" : " (not converged)") << '\n';
}

/// Solve on the configured data, or at the calibrated amplitude when requested.
SolveReport nonlocal_solve(Context& ctx, const FracLapOperator& op) {
    const GridPtr& grid = op.grid();
    const ReactionSpec spec = reaction_of(ctx.cfg);
    const SolverConfig scfg = solver_of(ctx.cfg);
    if (ctx.cfg.calibrate) {
        CalibrationOptions opts;
        opts.lo = ctx.cfg.amplitude_lo;
        opts.hi = ctx.cfg.amplitude_hi;
        opts.window = window_of(ctx.cfg, *grid);
        const CalibrationResult cal = calibrate_branching_amplitude(op, odd_data(ctx.cfg), spec, scfg, opts);
        ctx.cfg.amplitude = cal.amplitude;
        ctx.log << "  calibrated amplitude " << format_double(cal.amplitude) << " (" << cal.solves << " solves)\n";
        return cal.report;
    }
    return solve(op, exterior_data(ctx.cfg, grid), spec, scfg);
}

int run_solve(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    const FracLapOperator op = assemble(grid, ctx.cfg.s);
    const SolveReport rep = solve(op, exterior_data(ctx.cfg, grid), reaction_of(ctx.cfg), solver_of(ctx.cfg));
    log_solve(ctx, rep);
    const DeadCoreReport core = detect_dead_core(rep.u, 10.0 * ctx.cfg.residual_tol);
    write_solution(ctx, rep, ctx.cfg.s,
                   {{"dead_core_measure", format_double(core.measure)},
                    {"dead_core_intervals", std::to_string(core.intervals.size())}});
    return rep.converged ? ExitOk : ExitNonConvergence;
}

int run_solve_local(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    const SolveReport rep = solve_local(grid, {ctx.cfg.boundary_left, ctx.cfg.boundary_right}, reaction_of(ctx.cfg),
                                        solver_of(ctx.cfg));
    log_solve(ctx, rep);
    std::map<std::string, std::string> extra{{"boundary_left", format_double(ctx.cfg.boundary_left)},
                                             {"boundary_right", format_double(ctx.cfg.boundary_right)}};
    if (rep.free_boundary && rep.converged) {
        const FreeBoundaryCheck fb = one_phase_branching_check(rep, ctx.cfg.gamma);
        extra["free_boundary_branching"] = fb.holds ? "true" : "false";
    }
    write_solution(ctx, rep, std::nullopt, std::move(extra));
    return rep.converged ? ExitOk : ExitNonConvergence;
}

int run_exponent(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    const FracLapOperator op = assemble(grid, ctx.cfg.s);
    const SolveReport rep = nonlocal_solve(ctx, op);
    log_solve(ctx, rep);
    require_converged(rep);
    write_solution(ctx, rep, ctx.cfg.s);

    const ExponentTable table = exponent_table(ctx.cfg.s, ctx.cfg.gamma);
    const FitWindow window = window_of(ctx.cfg, *grid);
    const ExponentRow row{ctx.cfg.s, ctx.cfg.gamma, ctx.cfg.x0,
                          fit_growth_exponent(rep.u, ctx.cfg.x0, window, 0, table.target)};
    const ExponentRow grad{ctx.cfg.s, ctx.cfg.gamma, ctx.cfg.x0,
                           fit_growth_exponent(rep.u, ctx.cfg.x0, window, 1, table.gradient_target)};
    {
        auto f = open(ctx.out / "exponent.csv");
        write_exponent_csv({row}, f);
    }
    {
        auto f = open(ctx.out / "gradient.csv");
        write_exponent_csv({grad}, f);
    }
    if (const auto warning = branching_mode_warning(ctx.cfg.nu, ctx.cfg.s, ctx.cfg.gamma)) {
        ctx.log << "  warning: " << *warning << '\n';
    }
    const BranchingReport br =
        detect_branching(rep.u, ctx.cfg.nu, default_branching_tolerances(grid->h(), ctx.cfg.s, ctx.cfg.gamma));
    {
        auto f = open(ctx.out / "branching.csv");
        write_branching_csv(br.points, f);
    }
    const std::map<std::string, std::string> result{{"slope", format_double(row.fit.slope)},
                                                    {"gradient_slope", format_double(grad.fit.slope)},
                                                    {"schauder", format_double(table.schauder)},
                                                    {"branching_points", std::to_string(br.points.size())},
                                                    {"branching_candidates", std::to_string(br.candidates.size())}};
    write_meta(ctx, "exponent", result);
    ctx.log << "  slope " << format_double(row.fit.slope) << " (target " << format_double(table.target)
            << "), gradient slope " << format_double(grad.fit.slope) << '\n';
    return ExitOk;
}

int run_blowup(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    const FracLapOperator op = assemble(grid, ctx.cfg.s);
    const SolveReport rep = nonlocal_solve(ctx, op);
    log_solve(ctx, rep);
    require_converged(rep);
    write_solution(ctx, rep, ctx.cfg.s);

    auto summary = open(ctx.out / "blowup.csv");
    summary << "r,sup_b1\n";
    for (const double r : ctx.cfg.blowup_radii) {
        const GridFunction v = blow_up(rep.u, ctx.cfg.x0, r, ctx.cfg.s, ctx.cfg.gamma);
        auto f = open(ctx.out / ("blowup_" + format_double(r) + ".csv"));
        write_grid_function_csv(v, f);
        summary << format_double(r) << ',' << format_double(sup_on_ball(v, 0.0, 1.0)) << '\n';
    }
    write_meta(ctx, "blowup", {});
    return ExitOk;
}

int run_compare(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    const FracLapOperator op = assemble(grid, ctx.cfg.s);
    const ReactionSpec spec = reaction_of(ctx.cfg);
    const SolverConfig scfg = solver_of(ctx.cfg);
    Rng rng(ctx.cfg.seed);
    auto f = open(ctx.out / "compare.csv");
    f << "pair,holds,max_violation\n";
    int violations = 0;
    double worst = 0.0;
    for (int k = 0; k < ctx.cfg.pairs; ++k) {
        const OrderedPair pair = random_ordered_pair(grid, rng);
        const ComparisonResult res = comparison_check(op, spec, pair.upper, pair.lower, scfg);
        f << k << ',' << (res.holds ? "true" : "false") << ',' << format_double(res.max_violation) << '\n';
        violations += res.holds ? 0 : 1;
        worst = std::max(worst, res.max_violation);
    }
    write_meta(ctx, "compare", {{"violations", std::to_string(violations)}, {"max_violation", format_double(worst)}});
    ctx.log << "  " << violations << " of " << ctx.cfg.pairs << " pairs violate the comparison\n";
    return ExitOk;
}

int run_liouville(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    const FracLapOperator op = assemble(grid, ctx.cfg.s);
    const SolveReport rep = nonlocal_solve(ctx, op);
    log_solve(ctx, rep);
    require_converged(rep);
    write_solution(ctx, rep, ctx.cfg.s);

    LiouvilleOptions opts;
    opts.solver_output = true;
    const LiouvilleReport lr = liouville_probe(rep.u, ctx.cfg.s, ctx.cfg.gamma, ctx.cfg.probe_radii, opts);
    auto f = open(ctx.out / "liouville.csv");
    f << "R,q\n";
    for (std::size_t k = 0; k < lr.radii.size(); ++k) {
        f << format_double(lr.radii[k]) << ',' << format_double(lr.q[k]) << '\n';
    }
    write_meta(ctx, "liouville",
               {{"classification", std::string(to_string(lr.classification))},
                {"assertion_checked", lr.assertion_checked ? "true" : "false"},
                {"assertion_passed", lr.assertion_passed ? "true" : "false"},
                {"sup_abs", format_double(lr.sup_abs)}});
    ctx.log << "  classification " << to_string(lr.classification) << '\n';
    return ExitOk;
}

int run_slimit(Context& ctx) {
    const GridPtr grid = grid_of(ctx.cfg);
    SLimitOptions opts;
    opts.fit_slopes = ctx.cfg.calibrate;
    opts.calibration.lo = ctx.cfg.amplitude_lo;
    opts.calibration.hi = ctx.cfg.amplitude_hi;
    opts.calibration.window = window_of(ctx.cfg, *grid);
    const auto rows =
        s_limit_study(grid, odd_data(ctx.cfg), reaction_of(ctx.cfg), ctx.cfg.s_list, solver_of(ctx.cfg), opts);
    auto f = open(ctx.out / "slimit.csv");
    write_slimit_csv(rows, f);
    write_meta(ctx, "slimit", {});
    for (const auto& r : rows) {
        ctx.log << "  s " << format_double(r.s) << ": distance " << format_double(r.distance) << '\n';
    }
    return ExitOk;
}

int run_validate(Context& ctx) {
    const ParamDiagnostic d = validate_params(ctx.cfg.s, ctx.cfg.gamma);
    ctx.log << render(d);
    return d.ok() ? ExitOk : ExitValidation;
}

void print_plan(const Context& ctx) {
    ctx.log << "plan: " << to_string(ctx.cfg.mode) << " -> " << ctx.out.string() << '\n';
    for (const auto& [k, v] : describe(ctx.cfg)) {
        ctx.log << "  " << k << " = " << v << '\n';
    }
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::GridMismatch:
    case ErrorCode::UnorderedData:
    case ErrorCode::ParseError: return ExitValidation;
    case ErrorCode::NonConvergence: return ExitNonConvergence;
    case ErrorCode::BallExitsGrid:
    case ErrorCode::FlatFunction:
    case ErrorCode::NoFreeBoundary: return ExitAnalysis;
    }
    return ExitAnalysis;
}

} // namespace

std::string_view to_string(ParamCode code) noexcept {
    switch (code) {
    case ParamCode::Ok: return "ok";
    case ParamCode::NuIndeterminate: return "nu-indeterminate";
    case ParamCode::GammaOutOfRange: return "gamma-out-of-range";
    case ParamCode::SOutOfRange: return "s-out-of-range";
    }
    return "ok";
}

ParamDiagnostic validate_params(double s, double gamma) {
    ParamDiagnostic d;
    if (!(gamma > 0.0 && gamma < 1.0 / 3.0)) {
        d.code = ParamCode::GammaOutOfRange;
        d.message = "gamma = " + format_double(gamma) + " is outside (0, 1/3)";
        return d;
    }
    if (!(s > 0.5 && s < 1.0)) {
        d.code = ParamCode::SOutOfRange;
        d.message = "s = " + format_double(s) + " is outside (1/2, 1)";
        return d;
    }
    d.table = exponent_table(s, gamma);
    if (d.table->nu == NuRegime::Indeterminate) {
        d.code = ParamCode::NuIndeterminate;
        d.message = "nu indeterminate: s lies in [1 - gamma, 1 - gamma/2] = [" + format_double(1.0 - gamma) + ", " +
                    format_double(1.0 - gamma / 2.0) + "]";
    } else {
        d.message = "nu = " + std::string(to_string(d.table->nu)) + ", target " + format_double(d.table->target);
    }
    return d;
}

std::string render(const ParamDiagnostic& d) {
    std::ostringstream out;
    out << "status=" << to_string(d.code) << '\n' << "message=" << d.message << '\n';
    if (d.table) {
        out << "s=" << format_double(d.table->s) << '\n'
            << "gamma=" << format_double(d.table->gamma) << '\n'
            << "nu=" << to_string(d.table->nu) << '\n'
            << "target=" << format_double(d.table->target) << '\n'
            << "gradient_target=" << format_double(d.table->gradient_target) << '\n'
            << "schauder=" << format_double(d.table->schauder) << '\n';
    }
    return out.str();
}

int run(ExperimentConfig cfg, const RunOptions& options, std::ostream& log) {
    if (options.out) {
        cfg.out = *options.out;
    }
    if (options.seed) {
        cfg.seed = *options.seed;
    }
    Context ctx{cfg, cfg.out, log};
    try {
        if (cfg.mode == Mode::Validate) {
            return run_validate(ctx);
        }
        check(cfg);
        if (const auto d = validate_params(cfg.s, cfg.gamma); needs_s(cfg.mode) && d.code == ParamCode::NuIndeterminate) {
            log << "warning: " << d.message << '\n';
        }
        if (options.dry_run) {
            print_plan(ctx);
            return ExitOk;
        }
        fs::create_directories(ctx.out);
        log << to_string(cfg.mode) << " -> " << ctx.out.string() << '\n';
        switch (cfg.mode) {
        case Mode::Solve: return run_solve(ctx);
        case Mode::SolveLocal: return run_solve_local(ctx);
        case Mode::Exponent: return run_exponent(ctx);
        case Mode::Blowup: return run_blowup(ctx);
        case Mode::Compare: return run_compare(ctx);
        case Mode::Liouville: return run_liouville(ctx);
        case Mode::SLimit: return run_slimit(ctx);
        case Mode::Validate: break;
        }
        return ExitOk;
    } catch (const Error& e) {
        log << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << '\n';
        return ExitValidation;
    }
}

int run_file(const fs::path& path, std::optional<Mode> expected, const RunOptions& options, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(path);
        if (expected) {
            require(!cfg.mode_explicit || cfg.mode == *expected, ErrorCode::InvalidArgument,
                    "config mode '" + std::string(to_string(cfg.mode)) + "' does not match subcommand '" +
                        std::string(to_string(*expected)) + "'");
            cfg.mode = *expected;
        }
    } catch (const Error& e) {
        log << path.string() << ": " << e.what() << '\n';
        return ExitValidation;
    }
    return run(cfg, options, log);
}

int run_all(const std::vector<fs::path>& configs, std::optional<Mode> expected, const RunOptions& options, int jobs,
            std::ostream& log) {
    std::vector<std::string> logs(configs.size());
    std::vector<int> codes(configs.size(), ExitOk);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < configs.size(); k = next++) {
            RunOptions opts = options;
            if (opts.out && configs.size() > 1) {
                opts.out = *opts.out / configs[k].stem();
            }
            std::ostringstream buf;
            codes[k] = run_file(configs[k], expected, opts, buf);
            logs[k] = buf.str();
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, configs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    int worst = ExitOk;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        log << logs[k];
        worst = std::max(worst, codes[k]);
    }
    return worst;
}

} // namespace deadcore::runner
