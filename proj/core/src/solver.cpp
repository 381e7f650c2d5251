#include "deadcore/solver.hpp"

#include "deadcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace deadcore {

std::string_view to_string(ReactionMode mode) noexcept {
    return mode == ReactionMode::TwoPhase ? "two-phase" : "one-phase";
}

ReactionMode parse_reaction_mode(std::string_view name) {
    if (name == "two-phase") {
        return ReactionMode::TwoPhase;
    }
    if (name == "one-phase" || name == "one-phase-positive") {
        return ReactionMode::OnePhase;
    }
    fail(ErrorCode::InvalidArgument, "unknown reaction mode '" + std::string(name) + "'");
}

void validate(const ReactionSpec& spec) {
    require(spec.gamma > 0.0 && spec.gamma < 1.0 / 3.0, ErrorCode::InvalidArgument, "gamma must lie in (0, 1/3)");
    require(spec.epsilon >= 0.0 && spec.epsilon <= 1e-6, ErrorCode::InvalidArgument, "epsilon must lie in [0, 1e-6]");
}

void validate(const SolverConfig& cfg) {
    require(cfg.residual_tol >= 1e-12, ErrorCode::InvalidArgument, "residual_tol must be at least 1e-12");
    require(cfg.max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be at least 1");
    require(cfg.armijo > 0.0 && cfg.armijo < 0.5, ErrorCode::InvalidArgument, "armijo parameter must lie in (0, 1/2)");
    require(cfg.backtrack > 0.0 && cfg.backtrack < 1.0, ErrorCode::InvalidArgument, "backtrack factor must lie in (0, 1)");
    require(cfg.min_step > 0.0, ErrorCode::InvalidArgument, "min_step must be positive");
    require(cfg.fallback_steps >= 0, ErrorCode::InvalidArgument, "fallback_steps must be non-negative");
}

namespace {

// u_+^gamma as exp(gamma ln u); zero for u <= 0.
template <class T>
T positive_power(T u, T p) {
    return u > T(0) ? std::exp(p * std::log(u)) : T(0);
}

} // namespace

double reaction(double u, const ReactionSpec& spec) noexcept {
    const double pos = positive_power(u, spec.gamma);
    if (spec.mode == ReactionMode::OnePhase) {
        return pos;
    }
    return pos - positive_power(-u, spec.gamma);
}

double reaction_potential(double u, const ReactionSpec& spec) noexcept {
    const double g1 = 1.0 + spec.gamma;
    if (spec.mode == ReactionMode::OnePhase) {
        return positive_power(u, g1) / g1;
    }
    return positive_power(std::abs(u), g1) / g1;
}

namespace {

using Vec = Eigen::VectorXd;
using LVec = std::vector<long double>;

// Newton runs in the reaction variable w: u = psi(w), where psi inverts f on the
// branches where f is invertible (w = sign(u)|u|^gamma) and is the identity on
// the flat branch u <= 0 of the one-phase reaction.
struct Parametrization {
    double gamma;
    bool one_phase;

    template <class T>
    T to_u(T w) const {
        const T inv = T(1) / T(gamma);
        if (w > T(0)) {
            return positive_power(w, inv);
        }
        return one_phase ? w : -positive_power(-w, inv);
    }

    template <class T>
    T to_w(T u) const {
        if (u > T(0)) {
            return positive_power(u, T(gamma));
        }
        return one_phase ? u : -positive_power(-u, T(gamma));
    }

    // w on the invertible branch (Newton update dw = f'(u) du)
    bool reaction_branch(long double w) const { return !one_phase || w >= 0.0L; }
};

template <class T>
T potential(T u, double gamma, bool one_phase) {
    const T g1 = T(1) + T(gamma);
    if (one_phase) {
        return positive_power(u, g1) / g1;
    }
    return positive_power(u < T(0) ? -u : u, g1) / g1;
}

class DenseQuadratic {
public:
    explicit DenseQuadratic(const Eigen::MatrixXd& A) : A_(A) {}

    Eigen::Index size() const { return A_.rows(); }
    Vec multiply(const Vec& x) const { return A_ * x; }

    LVec multiply(const LVec& x) const {
        const auto n = static_cast<std::size_t>(A_.rows());
        LVec out(n, 0.0L);
        for (std::size_t j = 0; j < n; ++j) {
            const long double xj = x[j];
            if (xj == 0.0L) {
                continue;
            }
            const double* col = A_.data() + j * n; // column-major, A symmetric
            for (std::size_t i = 0; i < n; ++i) {
                out[i] += static_cast<long double>(col[i]) * xj;
            }
        }
        return out;
    }

    Vec solve_shifted(const Vec& shift, const Vec& rhs) const {
        Eigen::MatrixXd M = A_;
        M.diagonal() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() != Eigen::Success) {
            return Eigen::LDLT<Eigen::MatrixXd>(M).solve(rhs);
        }
        return llt.solve(rhs);
    }

    double max_diagonal() const { return A_.diagonal().maxCoeff(); }
    double gershgorin() const { return A_.cwiseAbs().rowwise().sum().maxCoeff(); }

private:
    const Eigen::MatrixXd& A_;
};

/// (1/h^2) tridiag(-1, 2, -1).
class TridiagonalQuadratic {
public:
    TridiagonalQuadratic(Eigen::Index n, double h) : n_(n), diag_(2.0 / (h * h)), off_(-1.0 / (h * h)) {}

    Eigen::Index size() const { return n_; }

    template <class V>
    V multiply(const V& x) const {
        V out = x;
        const auto n = static_cast<std::size_t>(n_);
        for (std::size_t i = 0; i < n; ++i) {
            auto acc = diag_ * x[i];
            if (i > 0) {
                acc += off_ * x[i - 1];
            }
            if (i + 1 < n) {
                acc += off_ * x[i + 1];
            }
            out[i] = acc;
        }
        return out;
    }

    Vec solve_shifted(const Vec& shift, const Vec& rhs) const {
        // Thomas algorithm; the system is symmetric and diagonally dominant
        const Eigen::Index n = n_;
        Vec c(n), d(n), x(n);
        double denom = diag_ + shift[0];
        c[0] = off_ / denom;
        d[0] = rhs[0] / denom;
        for (Eigen::Index i = 1; i < n; ++i) {
            denom = diag_ + shift[i] - off_ * c[i - 1];
            c[i] = off_ / denom;
            d[i] = (rhs[i] - off_ * d[i - 1]) / denom;
        }
        x[n - 1] = d[n - 1];
        for (Eigen::Index i = n - 2; i >= 0; --i) {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        return x;
    }

    double max_diagonal() const { return diag_; }
    double gershgorin() const { return diag_ - 2.0 * off_; }

private:
    Eigen::Index n_;
    double diag_;
    double off_;
};

struct MinimizeResult {
    Vec u;
    double residual_inf = 0.0;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> trace;
};

// Solves z + tau f(z) = v for the scalar prox of Phi.
double prox(double v, double tau, const ReactionSpec& spec) {
    if (spec.mode == ReactionMode::OnePhase && v <= 0.0) {
        return v;
    }
    const double target = std::abs(v);
    double lo = 0.0, hi = target;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (mid + tau * positive_power(mid, spec.gamma) > target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double z = 0.5 * (lo + hi);
    return v < 0.0 ? -z : z;
}

template <class Quadratic>
class Minimizer {
public:
    Minimizer(const Quadratic& Q, const Vec& b, double h, const ReactionSpec& spec, const SolverConfig& cfg)
        : Q_(Q), b_(b), h_(h), spec_(spec), cfg_(cfg), param_{spec.gamma, spec.mode == ReactionMode::OnePhase} {
        derivative_cap_ = 1e30 * std::max(1.0, Q_.max_diagonal());
    }

    // The iterate is carried in extended precision and rounded to double only for
    // the convergence test and the result; through u = psi(w) a double w would
    // resolve u only to about eps/gamma, which times |A| sits near 1e-9.
    MinimizeResult run(const Vec& start) {
        MinimizeResult out;
        const auto n = static_cast<std::size_t>(Q_.size());
        w_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            w_[i] = param_.to_w(static_cast<long double>(start[static_cast<Eigen::Index>(i)]));
        }
        sync_u();

        double rinf = rounded_residual();
        energy_ = full_energy();
        long double& energy = energy_;
        out.trace.push_back({rinf, static_cast<double>(energy), 0.0, StepKind::Initial});
        int iter = 0;
        while (rinf > cfg_.residual_tol && iter < cfg_.max_iters) {
            long double change = 0.0L;
            const double step = newton_step(change);
            if (step > 0.0) {
                ++iter;
                energy += change;
                rinf = rounded_residual();
                out.trace.push_back({rinf, static_cast<double>(energy), step, StepKind::Newton});
                continue;
            }
            bool stalled = cfg_.fallback_steps == 0;
            for (int k = 0; k < cfg_.fallback_steps && iter < cfg_.max_iters; ++k) {
                if (!proximal_step(change)) {
                    stalled = true;
                    break;
                }
                ++iter;
                energy += change;
                rinf = rounded_residual();
                out.trace.push_back({rinf, static_cast<double>(energy), 1.0, StepKind::Proximal});
                if (rinf <= cfg_.residual_tol) {
                    break;
                }
            }
            if (stalled) {
                break;
            }
        }
        out.u = u_;
        out.residual_inf = rinf;
        out.energy = out.trace.back().energy;
        out.iterations = iter;
        out.converged = rinf <= cfg_.residual_tol;
        return out;
    }

private:
    void sync_u() {
        const auto n = w_.size();
        ul_.resize(n);
        u_.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            ul_[i] = param_.to_u(w_[i]);
            u_[static_cast<Eigen::Index>(i)] = static_cast<double>(ul_[i]) + 0.0; // no negative zeros
        }
    }

    double fprime(long double u, long double w) const {
        if (!param_.reaction_branch(w)) {
            return 0.0;
        }
        const double au = static_cast<double>(u < 0.0L ? -u : u);
        const double mag = spec_.epsilon > 0.0 ? std::max(au, spec_.epsilon) : au;
        if (mag == 0.0) {
            return derivative_cap_;
        }
        return std::min(derivative_cap_, spec_.gamma * std::exp((spec_.gamma - 1.0) * std::log(mag)));
    }

    long double f(long double u) const {
        const long double g = spec_.gamma;
        const long double pos = positive_power(u, g);
        return param_.one_phase ? pos : pos - positive_power(-u, g);
    }

    // A u + b + f(u), accumulated in extended precision
    template <class V>
    Vec residual_of(const V& u) const {
        const auto n = w_.size();
        LVec ul(n);
        for (std::size_t i = 0; i < n; ++i) {
            ul[i] = static_cast<long double>(u[i]);
        }
        const LVec Au = Q_.multiply(ul);
        Vec r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            r[k] = static_cast<double>(Au[i] + static_cast<long double>(b_[k]) + f(ul[i]));
        }
        return r;
    }

    double rounded_residual() const { return residual_of(u_).template lpNorm<Eigen::Infinity>(); }

    long double full_energy() const {
        const LVec Au = Q_.multiply(ul_);
        long double acc = 0.0L;
        for (std::size_t i = 0; i < ul_.size(); ++i) {
            acc += 0.5L * ul_[i] * Au[i] + static_cast<long double>(b_[static_cast<Eigen::Index>(i)]) * ul_[i] +
                   potential(ul_[i], spec_.gamma, param_.one_phase);
        }
        return static_cast<long double>(h_) * acc;
    }

    LVec gradient() const {
        LVec grad = Q_.multiply(ul_);
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] += static_cast<long double>(b_[static_cast<Eigen::Index>(i)]);
        }
        return grad;
    }

    // J(u + d) - J(u) from increments; near convergence the decrease sits far
    // below the rounding of J itself
    long double energy_change(const LVec& grad, const LVec& d) const {
        const LVec Ad = Q_.multiply(d);
        long double change = 0.0L;
        for (std::size_t i = 0; i < d.size(); ++i) {
            change += grad[i] * d[i] + 0.5L * d[i] * Ad[i] +
                      (potential(ul_[i] + d[i], spec_.gamma, param_.one_phase) -
                       potential(ul_[i], spec_.gamma, param_.one_phase));
        }
        return static_cast<long double>(h_) * change;
    }

    // Returns the accepted step length, or 0 when the line search fails.
    double newton_step(long double& change) {
        const auto n = w_.size();
        const Vec r = residual_of(ul_);
        Vec shift(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            shift[static_cast<Eigen::Index>(i)] = fprime(ul_[i], w_[i]);
        }
        const Vec du = Q_.solve_shifted(shift, -r);
        if (!du.allFinite()) {
            return 0.0;
        }
        // on the reaction branch f'(u) du = -r - A du, which stays finite where f' blows up
        const Vec Adu = Q_.multiply(du);
        std::vector<double> dw(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            dw[i] = param_.reaction_branch(w_[i]) ? -r[k] - Adu[k] : du[k];
        }
        const double slope = h_ * r.dot(du);
        if (!(slope < 0.0)) {
            return 0.0;
        }

        const LVec grad = gradient();
        const double rnorm = r.lpNorm<Eigen::Infinity>();
        const long double noise = 1e3L * std::numeric_limits<long double>::epsilon() * (1.0L + std::abs(energy_));
        LVec trial(n), d(n);
        for (double t = 1.0; t >= cfg_.min_step; t *= cfg_.backtrack) {
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = w_[i] + static_cast<long double>(t * dw[i]);
                d[i] = param_.to_u(trial[i]) - ul_[i];
            }
            change = energy_change(grad, d);
            if (!std::isfinite(static_cast<double>(change))) {
                continue;
            }
            bool accept = change <= static_cast<long double>(cfg_.armijo * t * slope);
            if (!accept && std::abs(change) <= noise && t * std::abs(slope) <= noise) {
                // J cannot resolve the step (nodes deep in the dead core, where f' is
                // huge and the correction lives almost entirely in w): fall back to
                // residual decrease
                LVec u(n);
                for (std::size_t i = 0; i < n; ++i) {
                    u[i] = ul_[i] + d[i];
                }
                accept = residual_of(u).template lpNorm<Eigen::Infinity>() < rnorm;
            }
            if (accept) {
                w_ = trial;
                sync_u();
                return t;
            }
        }
        return 0.0;
    }

    // Explicit step of size 1/|A| on the quadratic part, then the exact prox of Phi
    // per node. Rejected (returns false) when rounding makes it non-descending.
    bool proximal_step(long double& change) {
        const double tau = 1.0 / Q_.gershgorin();
        const LVec grad = gradient();
        LVec next(w_.size()), d(w_.size());
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double v = static_cast<double>(ul_[i] - static_cast<long double>(tau) * grad[i]);
            next[i] = param_.to_w(static_cast<long double>(prox(v, tau, spec_)));
            d[i] = param_.to_u(next[i]) - ul_[i];
        }
        change = energy_change(grad, d);
        if (!(change <= 0.0L)) {
            return false;
        }
        w_ = next;
        sync_u();
        return true;
    }

    const Quadratic& Q_;
    const Vec& b_;
    double h_;
    ReactionSpec spec_;
    SolverConfig cfg_;
    Parametrization param_;
    double derivative_cap_ = 0.0;
    long double energy_ = 0.0L;
    LVec w_;
    LVec ul_;
    Vec u_;
};

SolveReport to_report(MinimizeResult&& m, GridFunction u) {
    SolveReport rep;
    rep.u = std::move(u);
    rep.residual_inf = m.residual_inf;
    rep.energy = m.energy;
    rep.iterations = m.iterations;
    rep.converged = m.converged;
    rep.trace = std::move(m.trace);
    rep.threads = 1;
    return rep;
}

Vec interior_vector(const GridFunction& u) {
    const auto interior = u.grid->interior();
    Vec v(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = u.values[interior[k]];
    }
    return v;
}

void check_data(const FracLapOperator& op, const GridFunction& g) {
    require(g.grid && *g.grid == *op.grid(), ErrorCode::GridMismatch, "exterior data lives on a different grid");
}

// Right end of the run of non-positive interior values starting at -a, linearly
// interpolated to the sign change.
/// Values with |u| <= floor count as dead: a dead-core node whose neighbours vanish
/// has residual |u|^gamma, so anything below tol^(1/gamma) is solver noise.
std::optional<double> left_free_boundary(const GridFunction& u, double floor) {
    const auto interior = u.grid->interior();
    auto dead = [&](std::size_t k) { return u.values[interior[k]] <= floor; };
    if (interior.empty() || !dead(0)) {
        return std::nullopt;
    }
    std::size_t k = 0;
    while (k + 1 < interior.size() && dead(k + 1)) {
        ++k;
    }
    if (k + 1 == interior.size()) {
        return std::nullopt;
    }
    const double x0 = u.grid->x(interior[k]);
    const double v0 = std::max(u.values[interior[k]], 0.0);
    const double v1 = u.values[interior[k + 1]];
    return x0 + u.grid->h() * (-v0) / (v1 - v0);
}

} // namespace

double energy(const GridFunction& u, const FracLapOperator& op, const GridFunction& g, const ReactionSpec& spec) {
    check_data(op, g);
    require(u.grid && *u.grid == *op.grid(), ErrorCode::GridMismatch, "solution lives on a different grid");
    const Vec ui = interior_vector(u);
    const Vec b = op.load(g);
    long double acc = 0.5L * static_cast<long double>(ui.dot(op.matrix() * ui)) + static_cast<long double>(b.dot(ui));
    for (Eigen::Index i = 0; i < ui.size(); ++i) {
        acc += reaction_potential(ui[i], spec);
    }
    return op.grid()->h() * static_cast<double>(acc);
}

std::vector<double> residual(const GridFunction& u, const FracLapOperator& op, const GridFunction& g,
                             const ReactionSpec& spec) {
    check_data(op, g);
    require(u.grid && *u.grid == *op.grid(), ErrorCode::GridMismatch, "solution lives on a different grid");
    const Vec ui = interior_vector(u);
    const Vec r = op.matrix() * ui + op.load(g);
    std::vector<double> out(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        out[static_cast<std::size_t>(i)] = r[i] + reaction(ui[i], spec);
    }
    return out;
}

SolveReport solve(const FracLapOperator& op, const GridFunction& g, const ReactionSpec& spec, const SolverConfig& cfg,
                  const std::vector<double>* initial) {
    validate(spec);
    validate(cfg);
    check_data(op, g);
    const Vec b = op.load(g);
    const DenseQuadratic Q(op.matrix());

    Vec start;
    if (initial != nullptr) {
        require(initial->size() == op.unknowns(), ErrorCode::GridMismatch, "initial guess has the wrong length");
        start = Eigen::Map<const Vec>(initial->data(), static_cast<Eigen::Index>(initial->size()));
    } else {
        start = Q.solve_shifted(Vec::Zero(b.size()), -b); // s-harmonic extension of g
    }

    Minimizer<DenseQuadratic> minimizer(Q, b, op.grid()->h(), spec, cfg);
    MinimizeResult m = minimizer.run(start);

    std::vector<double> values = g.values;
    const auto interior = op.grid()->interior();
    for (std::size_t k = 0; k < interior.size(); ++k) {
        values[interior[k]] = m.u[static_cast<Eigen::Index>(k)];
    }
    return to_report(std::move(m), GridFunction(op.grid(), std::move(values), g.tail));
}

SolveReport solve_local(const GridPtr& grid, std::pair<double, double> boundary, const ReactionSpec& spec,
                        const SolverConfig& cfg) {
    validate(spec);
    validate(cfg);
    require(grid != nullptr, ErrorCode::InvalidArgument, "solve_local needs a grid");
    require(std::isfinite(boundary.first) && std::isfinite(boundary.second), ErrorCode::InvalidArgument,
            "boundary values must be finite");
    const auto interior = grid->interior();
    const auto n = static_cast<Eigen::Index>(interior.size());
    const double h = grid->h();
    const TridiagonalQuadratic Q(n, h);
    Vec b = Vec::Zero(n);
    b[0] -= boundary.first / (h * h);
    b[n - 1] -= boundary.second / (h * h);

    const Vec start = Q.solve_shifted(Vec::Zero(n), -b);
    Minimizer<TridiagonalQuadratic> minimizer(Q, b, h, spec, cfg);
    MinimizeResult m = minimizer.run(start);

    std::vector<double> values(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const std::ptrdiff_t slot = grid->interior_slot(i);
        if (slot >= 0) {
            values[i] = m.u[slot];
        } else {
            values[i] = grid->x(i) < 0.0 ? boundary.first : boundary.second;
        }
    }
    SolveReport rep = to_report(std::move(m), GridFunction(grid, std::move(values), TailModel::zero()));
    if (spec.mode == ReactionMode::OnePhase) {
        rep.free_boundary = left_free_boundary(rep.u, std::pow(cfg.residual_tol, 1.0 / spec.gamma));
    }
    return rep;
}

} // namespace deadcore
