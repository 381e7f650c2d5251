#include "deadcore/analysis.hpp"

#include "deadcore/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace deadcore {

DeadCoreReport detect_dead_core(const GridFunction& u, double tau) {
    require(tau > 0.0, ErrorCode::InvalidArgument, "dead-core tolerance must be positive");
    DeadCoreReport rep;
    const Grid& grid = *u.grid;
    const auto interior = grid.interior();
    std::optional<DeadCoreInterval> open;
    auto close = [&] {
        if (open) {
            rep.measure += open->hi - open->lo;
            rep.intervals.push_back(*open);
            open.reset();
        }
    };
    for (const auto i : interior) {
        if (std::abs(u.values[i]) <= tau) {
            if (!open) {
                open = DeadCoreInterval{grid.x(i), grid.x(i), i, i};
            }
            open->hi = grid.x(i);
            open->last_node = i;
        } else {
            close();
        }
    }
    close();
    return rep;
}

BranchingTolerances default_branching_tolerances(double h, double s, double gamma) {
    require(h > 0.0, ErrorCode::InvalidArgument, "grid spacing must be positive");
    const double beta = growth_exponent(s, gamma);
    return {10.0 * std::pow(h, beta), 10.0 * std::pow(h, beta - 1.0), 10.0 * std::pow(h, beta - 2.0)};
}

BranchingReport detect_branching(const GridFunction& u, int nu, const BranchingTolerances& tol) {
    require(nu == 1 || nu == 2, ErrorCode::InvalidArgument, "branching mode must be 1 or 2");
    require(tol.tau0 > 0.0 && tol.tau1 > 0.0 && (nu == 1 || tol.tau2 > 0.0), ErrorCode::InvalidArgument,
            "branching tolerances must be positive");
    BranchingReport rep;
    rep.tolerances = tol;
    rep.nu = nu;
    const GridFunction du = discrete_derivative(u, 1);
    const GridFunction d2u = discrete_derivative(u, 2);
    const Grid& grid = *u.grid;

    bool all_zero = true;
    for (const auto i : grid.interior()) {
        all_zero = all_zero && u.values[i] == 0.0;
        const BranchingCandidate c{i, grid.x(i), u.values[i], du.values[i], d2u.values[i]};
        const bool pass = std::abs(c.u) <= tol.tau0 && std::abs(c.du) <= tol.tau1 &&
                          (nu == 1 || std::abs(c.d2u) <= tol.tau2);
        if (pass) {
            rep.candidates.push_back(c);
        }
    }
    rep.degenerate = all_zero;

    for (std::size_t k = 0; k < rep.candidates.size();) {
        std::size_t end = k + 1;
        while (end < rep.candidates.size() && rep.candidates[end].node == rep.candidates[end - 1].node + 1) {
            ++end;
        }
        auto best = std::min_element(rep.candidates.begin() + static_cast<std::ptrdiff_t>(k),
                                     rep.candidates.begin() + static_cast<std::ptrdiff_t>(end),
                                     [](const BranchingCandidate& p, const BranchingCandidate& q) {
                                         return std::abs(p.u) < std::abs(q.u);
                                     });
        rep.points.push_back(*best);
        k = end;
    }
    return rep;
}

std::optional<std::string> branching_mode_warning(int nu, double s, double gamma) {
    const ExponentTable t = exponent_table(s, gamma);
    if (t.nu == NuRegime::Indeterminate) {
        return "nu indeterminate: s lies in [1 - gamma, 1 - gamma/2]";
    }
    const int expected = t.nu == NuRegime::One ? 1 : 2;
    if (expected != nu) {
        return "requested nu = " + std::to_string(nu) + " but the regime gives nu = " + std::to_string(expected);
    }
    return std::nullopt;
}

FitWindow default_fit_window(const Grid& grid) { return {8.0 * grid.h(), grid.a() / 4.0, 8}; }

namespace {

std::vector<double> lattice_radii(const FitWindow& w, double h) {
    std::vector<double> radii;
    const double ratio = std::pow(w.r_max / w.r_min, 1.0 / (w.count - 1));
    for (int j = 0; j < w.count; ++j) {
        double r = std::round(w.r_min * std::pow(ratio, j) / h) * h;
        if (!radii.empty()) {
            r = std::max(r, radii.back() + h);
        }
        radii.push_back(r);
    }
    return radii;
}

} // namespace

ExponentFit fit_growth_exponent(const GridFunction& u, double x0, const FitWindow& window, int deriv_order,
                                double target) {
    require(deriv_order == 0 || deriv_order == 1, ErrorCode::InvalidArgument, "fit order must be 0 or 1");
    const double h = u.grid->h();
    require(window.r_min >= 4.0 * h * (1.0 - 1e-9), ErrorCode::InvalidArgument, "r_min must be at least 4h");
    require(window.count >= 4, ErrorCode::InvalidArgument, "at least 4 radii are needed");
    require(window.r_max > window.r_min, ErrorCode::InvalidArgument, "r_max must exceed r_min");

    ExponentFit fit;
    fit.radii = lattice_radii(window, h);
    const GridFunction field = deriv_order == 0 ? u : discrete_derivative(u, 1);
    const auto k = static_cast<Eigen::Index>(fit.radii.size());
    Eigen::VectorXd t(k), y(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double r = fit.radii[static_cast<std::size_t>(j)];
        const double sup = sup_on_ball(field, x0, r);
        require(sup > 0.0 && std::isfinite(sup), ErrorCode::FlatFunction,
                "flat function: sup vanishes on B_" + std::to_string(r));
        fit.sups.push_back(sup);
        t[j] = std::log(r);
        y[j] = std::log(sup);
    }

    Eigen::MatrixXd X(k, 2);
    X.col(0).setOnes();
    X.col(1) = t;
    const Eigen::VectorXd line = X.colPivHouseholderQr().solve(y);
    fit.intercept = line[0];
    fit.slope = line[1];
    const double ss_tot = (y.array() - y.mean()).square().sum();
    const double ss_res = (y - X * line).squaredNorm();
    fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;

    Eigen::MatrixXd Q(k, 3);
    Q.leftCols(2) = X;
    Q.col(2) = t.array().square();
    fit.curvature = Q.colPivHouseholderQr().solve(y)[2];

    fit.target = target;
    if (std::isfinite(target) && target != 0.0) {
        fit.relative_gap = std::abs(fit.slope - target) / std::abs(target);
    }
    return fit;
}

ExponentFit fit_growth_exponent(const GridFunction& u, double x0, double r_min, double r_max, int k,
                                int deriv_order) {
    return fit_growth_exponent(u, x0, FitWindow{r_min, r_max, k}, deriv_order);
}

namespace {

double blow_up_rate(double r, double s, double gamma) {
    require(r > 0.0 && r <= 1.0, ErrorCode::InvalidArgument, "blow-up radius must lie in (0, 1]");
    require(s > 0.0 && s <= 1.0, ErrorCode::InvalidArgument, "blow-up order s must lie in (0, 1]");
    require(gamma > 0.0 && gamma < 1.0, ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
    return std::pow(r, growth_exponent(s, gamma));
}

} // namespace

GridFunction blow_up(const GridFunction& u, double x0, double r, double s, double gamma) {
    const double scale = blow_up_rate(r, s, gamma);
    const Grid& grid = *u.grid;
    const double R = grid.R();
    require(std::abs(x0) + r * R <= R * (1.0 + 1e-12), ErrorCode::BallExitsGrid,
            "blow-up window exits the grid");
    const std::size_t n = grid.size();
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double p = std::clamp(grid.lattice_coordinate(x0 + r * grid.x(k)), 0.0, static_cast<double>(n - 1));
        const auto i = std::min(static_cast<std::size_t>(p), n - 2);
        const double w = p - static_cast<double>(i);
        v[k] = ((1.0 - w) * u.values[i] + w * u.values[i + 1]) / scale;
    }
    return GridFunction(u.grid, std::move(v), TailModel::zero());
}

GridFunction blow_up(const ScalarFunction& u, const GridPtr& grid, double x0, double r, double s, double gamma) {
    const double scale = blow_up_rate(r, s, gamma);
    return sample([&](double x) { return u(x0 + r * x) / scale; }, grid);
}

namespace {

void require_ordered(const GridFunction& g1, const GridFunction& g2) {
    const Grid& grid = *g1.grid;
    for (const auto j : grid.exterior()) {
        require(g1.values[j] >= g2.values[j], ErrorCode::UnorderedData,
                "exterior data not ordered at x = " + std::to_string(grid.x(j)));
    }
    // the tails are monotone in |y|, so a geometric sweep covers every crossing of practical size
    for (int k = 0; k <= 60; ++k) {
        const double y = grid.R() * std::ldexp(1.0, k) * (1.0 + 1e-12);
        require(g1.tail(y) >= g2.tail(y) && g1.tail(-y) >= g2.tail(-y), ErrorCode::UnorderedData,
                "tail models not ordered");
    }
}

} // namespace

ComparisonResult comparison_check(const FracLapOperator& op, const ReactionSpec& spec, const GridFunction& g1,
                                  const GridFunction& g2, const SolverConfig& cfg) {
    require(g1.grid && g2.grid && *g1.grid == *op.grid() && *g2.grid == *op.grid(), ErrorCode::GridMismatch,
            "exterior data lives on a different grid");
    require_ordered(g1, g2);
    ComparisonResult res;
    res.upper = solve(op, g1, spec, cfg);
    res.lower = solve(op, g2, spec, cfg);
    require(res.upper.converged && res.lower.converged, ErrorCode::NonConvergence,
            "comparison solve did not converge");
    for (const auto i : op.grid()->interior()) {
        res.max_violation = std::max(res.max_violation, res.lower.u.values[i] - res.upper.u.values[i]);
    }
    res.holds = res.max_violation <= 10.0 * cfg.residual_tol;
    return res;
}

OrderedPair random_ordered_pair(const GridPtr& grid, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    const double a = grid->a();
    const double R = grid->R();

    const double level = between(-1.0, 1.0);
    double coef[3], freq[3], phase[3];
    for (int k = 0; k < 3; ++k) {
        coef[k] = between(-0.5, 0.5);
        freq[k] = between(0.5, 4.0);
        phase[k] = between(0.0, 6.283185307179586);
    }
    const double gap = between(0.0, 0.2);
    const double bump = between(0.0, 0.5);
    const double centre = between(-R, R);
    const double width = between(0.25, 2.0);

    // (1 - t^2)^2 on t = (|y| - a)/(R - a) joins the constant tail smoothly at R
    auto cutoff = [=](double y) {
        const double t = std::clamp((std::abs(y) - a) / (R - a), 0.0, 1.0);
        return (1.0 - t * t) * (1.0 - t * t);
    };
    auto upper = [=](double y) {
        if (std::abs(y) < a) {
            return 0.0;
        }
        double v = 0.0;
        for (int k = 0; k < 3; ++k) {
            v += coef[k] * std::cos(freq[k] * y + phase[k]);
        }
        return level + cutoff(y) * v;
    };
    auto gap_fn = [=](double y) {
        const double z = (y - centre) / width;
        return gap + bump * cutoff(y) * std::exp(-z * z);
    };
    GridFunction g1 = sample(upper, grid, TailModel::constant(level));
    GridFunction g2 = sample([&](double y) { return std::abs(y) < a ? 0.0 : upper(y) - gap_fn(y); }, grid,
                             TailModel::constant(level - gap));
    return {std::move(g1), std::move(g2)};
}

std::string_view to_string(GrowthClass c) noexcept {
    switch (c) {
    case GrowthClass::Decaying: return "decaying";
    case GrowthClass::Critical: return "critical";
    case GrowthClass::Growing: return "growing";
    }
    return "growing";
}

LiouvilleReport liouville_probe(const GridFunction& u, double s, double gamma, const std::vector<double>& radii,
                                const LiouvilleOptions& opts) {
    require(radii.size() >= 2, ErrorCode::InvalidArgument, "liouville probe needs at least two radii");
    require(opts.decay_factor > 1.0, ErrorCode::InvalidArgument, "decay factor must exceed 1");
    for (std::size_t k = 1; k < radii.size(); ++k) {
        require(radii[k] > radii[k - 1], ErrorCode::InvalidArgument, "radii must be increasing");
    }
    const double beta = growth_exponent(s, gamma);
    LiouvilleReport rep;
    rep.radii = radii;
    for (const double R : radii) {
        rep.q.push_back(sup_on_ball(u, 0.0, R) / std::pow(R, beta));
    }
    rep.sup_abs = sup_on_ball(u, 0.0, radii.back());

    bool decaying = true, critical = true;
    const double lo = 1.0 / opts.decay_factor;
    for (std::size_t k = 0; k + 1 < rep.q.size(); ++k) {
        const double a = rep.q[k], b = rep.q[k + 1];
        if (a == 0.0 && b == 0.0) {
            critical = false;
            continue;
        }
        const double doublings = std::log2(radii[k + 1] / radii[k]);
        const double factor = b == 0.0 ? INFINITY : std::pow(a / b, 1.0 / doublings);
        decaying = decaying && factor >= opts.decay_factor;
        critical = critical && factor > lo && factor < opts.decay_factor;
    }
    rep.classification = decaying ? GrowthClass::Decaying : critical ? GrowthClass::Critical : GrowthClass::Growing;
    if (opts.solver_output && rep.classification == GrowthClass::Decaying) {
        rep.assertion_checked = true;
        rep.assertion_passed = rep.sup_abs <= opts.smallness_tol;
    }
    return rep;
}

FreeBoundaryCheck one_phase_branching_check(const GridFunction& u, double x_star, double gamma) {
    FreeBoundaryCheck out;
    const Grid& grid = *u.grid;
    out.x_star = x_star;
    out.tolerances = default_branching_tolerances(grid.h(), 1.0, gamma);
    const GridFunction du = discrete_derivative(u, 1);
    const GridFunction d2u = discrete_derivative(u, 2);
    for (const auto i : grid.interior()) {
        if (std::abs(grid.x(i) - x_star) <= grid.h() * (1.0 + 1e-9)) {
            out.nodes.push_back({i, grid.x(i), u.values[i], du.values[i], d2u.values[i]});
        }
    }
    require(!out.nodes.empty(), ErrorCode::NoFreeBoundary, "free boundary lies outside the interior");
    out.holds = std::all_of(out.nodes.begin(), out.nodes.end(), [&](const BranchingCandidate& c) {
        return std::abs(c.u) <= out.tolerances.tau0 && std::abs(c.du) <= out.tolerances.tau1 &&
               std::abs(c.d2u) <= out.tolerances.tau2;
    });
    return out;
}

FreeBoundaryCheck one_phase_branching_check(const SolveReport& report, double gamma) {
    require(report.free_boundary.has_value(), ErrorCode::NoFreeBoundary, "no free boundary: the dead core is empty");
    return one_phase_branching_check(report.u, *report.free_boundary, gamma);
}

CalibrationResult calibrate_branching_amplitude(const FracLapOperator& op, const OddExteriorData& data,
                                                const ReactionSpec& spec, const SolverConfig& cfg,
                                                const CalibrationOptions& opts) {
    require(opts.lo > 0.0 && opts.hi > opts.lo, ErrorCode::InvalidArgument, "amplitude bracket must be 0 < lo < hi");
    require(opts.bisections >= 1, ErrorCode::InvalidArgument, "at least one bisection is needed");
    const FitWindow window = opts.window.value_or(default_fit_window(*op.grid()));
    CalibrationResult res;
    std::vector<double> warm;
    auto run = [&](double amp) {
        SolveReport rep = solve(op, data.with_amplitude(amp).on(op.grid()), spec, cfg, warm.empty() ? nullptr : &warm);
        ++res.solves;
        require(rep.converged, ErrorCode::NonConvergence, "calibration solve did not converge");
        warm = rep.u.interior_values();
        return rep;
    };

    // positive curvature: the crossing is already linear at small radii. Deep inside
    // the dead-core regime the profile turns convex again, so the sign change is
    // bracketed by scanning down from the top of the interval first.
    auto convex = [&](double amp) {
        const SolveReport rep = run(amp);
        return fit_growth_exponent(rep.u, 0.0, window, 0).curvature > 0.0;
    };
    double hi = opts.hi;
    require(convex(hi), ErrorCode::InvalidArgument, "calibration bracket top is not in the crossing regime");
    double lo = hi * opts.scan_factor;
    while (convex(lo)) {
        require(lo > opts.lo, ErrorCode::InvalidArgument, "no branching amplitude inside the calibration bracket");
        hi = lo;
        lo = std::max(opts.lo, lo * opts.scan_factor);
    }
    for (int k = 0; k < opts.bisections; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (convex(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    res.amplitude = 0.5 * (lo + hi);
    res.report = run(res.amplitude);
    const double target = growth_exponent(op.s(), spec.gamma);
    res.fit = fit_growth_exponent(res.report.u, 0.0, window, 0, target);
    res.gradient_fit = fit_growth_exponent(res.report.u, 0.0, window, 1, target - 1.0);
    return res;
}

std::vector<SLimitRow> s_limit_study(const GridPtr& grid, const OddExteriorData& data, const ReactionSpec& spec,
                                     const std::vector<double>& s_list, const SolverConfig& cfg,
                                     const SLimitOptions& opts) {
    require(!s_list.empty(), ErrorCode::InvalidArgument, "s list is empty");
    const GridFunction g = data.on(grid);
    const SolveReport local = solve_local(grid, {data(-grid->a()), data(grid->a())}, spec, cfg);
    require(local.converged, ErrorCode::NonConvergence, "local solve did not converge");

    std::vector<SLimitRow> rows;
    for (const double s : s_list) {
        const FracLapOperator op = assemble(grid, s, opts.quadrature);
        const SolveReport rep = solve(op, g, spec, cfg);
        require(rep.converged, ErrorCode::NonConvergence, "s-limit solve did not converge at s = " + std::to_string(s));
        SLimitRow row;
        row.s = s;
        for (const auto i : grid->interior()) {
            row.distance = std::max(row.distance, std::abs(rep.u.values[i] - local.u.values[i]));
        }
        if (opts.fit_slopes) {
            row.slope = calibrate_branching_amplitude(op, data, spec, cfg, opts.calibration).fit.slope;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace deadcore
