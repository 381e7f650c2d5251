#pragma once

#include "deadcore/fraclap.hpp"
#include "deadcore/grid.hpp"

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace deadcore {

enum class ReactionMode { TwoPhase, OnePhase };

std::string_view to_string(ReactionMode mode) noexcept;
ReactionMode parse_reaction_mode(std::string_view name);

struct ReactionSpec {
    double gamma = 0.2;
    ReactionMode mode = ReactionMode::TwoPhase;
    /// Floor on |u| inside the linearization f'(u) = gamma max(|u|, eps)^(gamma-1).
    /// Zero means the exact derivative (capped only by overflow protection).
    double epsilon = 0.0;
};

void validate(const ReactionSpec& spec);

/// f(u) = u_+^gamma - u_-^gamma (two-phase) or u_+^gamma (one-phase).
double reaction(double u, const ReactionSpec& spec) noexcept;

/// Primitive of the reaction: |u|^(1+gamma)/(1+gamma), or its positive part.
double reaction_potential(double u, const ReactionSpec& spec) noexcept;

struct SolverConfig {
    double residual_tol = 1e-9;
    int max_iters = 100;
    double armijo = 1e-4;
    double backtrack = 0.5;
    double min_step = 1e-12;
    /// Proximal-gradient iterations taken whenever a Newton line search fails.
    int fallback_steps = 50;
};

void validate(const SolverConfig& cfg);

enum class StepKind { Initial, Newton, Proximal };

struct IterationRecord {
    double residual = 0.0;
    double energy = 0.0;
    double step = 0.0;
    StepKind kind = StepKind::Initial;
};

struct SolveReport {
    GridFunction u;
    double residual_inf = 0.0;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> trace;
    int threads = 1;
    /// Right end of the dead core adjacent to -a, for one-phase local solves. Nodes
    /// with u <= residual_tol^(1/gamma) count as dead.
    std::optional<double> free_boundary;
};

/// Discrete energy h [ 1/2 <u, A u> + <b(g), u> + sum Phi(u_i) ] over interior nodes.
/// Its gradient is h (A u + b + f(u)).
double energy(const GridFunction& u, const FracLapOperator& op, const GridFunction& g, const ReactionSpec& spec);

/// Pointwise residual A u + b(g) + f(u) over interior slots.
std::vector<double> residual(const GridFunction& u, const FracLapOperator& op, const GridFunction& g,
                             const ReactionSpec& spec);

/// Minimizes the strictly convex energy; the minimizer solves (-Delta)^s_h u + f(u) = 0
/// in Omega with u = g outside. Never throws on non-convergence: check `converged`.
/// `initial` (interior slots) overrides the s-harmonic extension of g as starting point.
SolveReport solve(const FracLapOperator& op, const GridFunction& g, const ReactionSpec& spec,
                  const SolverConfig& cfg = {}, const std::vector<double>* initial = nullptr);

/// Same contract with the three-point second difference in place of A: u'' = f(u)
/// in (-a, a) with u(-a), u(a) given.
SolveReport solve_local(const GridPtr& grid, std::pair<double, double> boundary, const ReactionSpec& spec,
                        const SolverConfig& cfg = {});

} // namespace deadcore
