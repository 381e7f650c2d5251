#pragma once

#include "deadcore/grid.hpp"

#include <string_view>

namespace deadcore {

/// u*(x) = kappa (x_+^beta - x_-^beta) with beta = 2/(1-gamma) and
/// kappa = (beta(beta-1))^{-1/(1-gamma)}: solves u'' = u_+^gamma - u_-^gamma on R
/// with every point of {x = 0} a branching point.
struct LocalProfile {
    double gamma = 0.2;
    double beta = 2.5;
    double kappa = 0.0;

    double operator()(double x) const noexcept;
    /// Exact derivative of order 0, 1 or 2.
    double derivative(double x, int order) const;
};

LocalProfile exact_local_profile(double gamma);

/// Number of derivatives that must vanish at a branching point.
enum class NuRegime { One, Two, Indeterminate };

std::string_view to_string(NuRegime nu) noexcept;

struct ExponentTable {
    double s = 0.0;
    double gamma = 0.0;
    double target = 0.0;          ///< 2s / (1 - gamma)
    double gradient_target = 0.0; ///< target - 1
    double schauder = 0.0;        ///< 2s + gamma
    NuRegime nu = NuRegime::Indeterminate;
};

/// Requires s in (1/2, 1) and gamma in (0, 1/3).
ExponentTable exponent_table(double s, double gamma);

/// 2s / (1 - gamma); s = 1 gives the local exponent.
double growth_exponent(double s, double gamma);

enum class OddShape { Ramp, Plateau };

OddShape parse_odd_shape(std::string_view name);
std::string_view to_string(OddShape shape) noexcept;

/// Odd exterior data. Ramp: g(y) = A sign(y) min(1, |y| - a)^2; plateau:
/// g(y) = A sign(y); both for |y| >= a. Beyond R either one equals A sign(y),
/// which is carried by an odd constant tail.
struct OddExteriorData {
    OddShape shape = OddShape::Ramp;
    double amplitude = 1.0;
    double a = 1.0;

    double operator()(double y) const noexcept;
    TailModel tail() const noexcept;
    /// Values at every node (interior nodes set to zero) plus the tail.
    GridFunction on(const GridPtr& grid) const;
    OddExteriorData with_amplitude(double amp) const noexcept;
};

OddExteriorData odd_exterior_builder(OddShape shape, double amplitude, double a = 1.0);

} // namespace deadcore
