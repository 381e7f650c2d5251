#include "deadcore/profiles.hpp"

#include "deadcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deadcore {

namespace {

void check_gamma(double gamma) {
    require(gamma > 0.0 && gamma < 1.0 / 3.0, ErrorCode::InvalidArgument, "gamma must lie in (0, 1/3)");
}

} // namespace

double LocalProfile::operator()(double x) const noexcept {
    if (x == 0.0) {
        return 0.0;
    }
    const double mag = kappa * std::pow(std::abs(x), beta);
    return x > 0.0 ? mag : -mag;
}

double LocalProfile::derivative(double x, int order) const {
    const double ax = std::abs(x);
    switch (order) {
    case 0: return (*this)(x);
    case 1: return kappa * beta * std::pow(ax, beta - 1.0); // even
    case 2: {
        if (x == 0.0) {
            return 0.0;
        }
        const double mag = kappa * beta * (beta - 1.0) * std::pow(ax, beta - 2.0);
        return x > 0.0 ? mag : -mag;
    }
    default: fail(ErrorCode::InvalidArgument, "profile derivative order must be 0, 1 or 2");
    }
}

LocalProfile exact_local_profile(double gamma) {
    check_gamma(gamma);
    LocalProfile p;
    p.gamma = gamma;
    p.beta = 2.0 / (1.0 - gamma);
    p.kappa = std::pow(p.beta * (p.beta - 1.0), -1.0 / (1.0 - gamma));
    return p;
}

std::string_view to_string(NuRegime nu) noexcept {
    switch (nu) {
    case NuRegime::One: return "1";
    case NuRegime::Two: return "2";
    case NuRegime::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

double growth_exponent(double s, double gamma) { return 2.0 * s / (1.0 - gamma); }

ExponentTable exponent_table(double s, double gamma) {
    require(s > 0.5 && s < 1.0, ErrorCode::InvalidArgument, "s must lie in (1/2, 1)");
    check_gamma(gamma);
    ExponentTable t;
    t.s = s;
    t.gamma = gamma;
    t.target = growth_exponent(s, gamma);
    t.gradient_target = t.target - 1.0;
    t.schauder = 2.0 * s + gamma;
    if (s < 1.0 - gamma) {
        t.nu = NuRegime::One;
    } else if (s > 1.0 - gamma / 2.0) {
        t.nu = NuRegime::Two;
    } else {
        t.nu = NuRegime::Indeterminate;
    }
    return t;
}

OddShape parse_odd_shape(std::string_view name) {
    if (name == "ramp") {
        return OddShape::Ramp;
    }
    if (name == "plateau") {
        return OddShape::Plateau;
    }
    fail(ErrorCode::InvalidArgument, "unknown data shape '" + std::string(name) + "'");
}

std::string_view to_string(OddShape shape) noexcept { return shape == OddShape::Ramp ? "ramp" : "plateau"; }

double OddExteriorData::operator()(double y) const noexcept {
    const double ay = std::abs(y);
    if (ay < a) {
        return 0.0;
    }
    double mag = amplitude;
    if (shape == OddShape::Ramp) {
        const double t = std::min(1.0, ay - a);
        mag *= t * t;
    }
    return y > 0.0 ? mag : -mag;
}

TailModel OddExteriorData::tail() const noexcept {
    return amplitude == 0.0 ? TailModel::zero() : TailModel::constant(amplitude, TailModel::Parity::Odd);
}

GridFunction OddExteriorData::on(const GridPtr& grid) const {
    require(grid->R() >= a + 1.0 || shape == OddShape::Plateau, ErrorCode::InvalidArgument,
            "ramp data must saturate inside the truncation radius");
    return sample(*this, grid, tail());
}

OddExteriorData OddExteriorData::with_amplitude(double amp) const noexcept {
    OddExteriorData d = *this;
    d.amplitude = amp;
    return d;
}

OddExteriorData odd_exterior_builder(OddShape shape, double amplitude, double a) {
    require(amplitude >= 0.0 && std::isfinite(amplitude), ErrorCode::InvalidArgument, "amplitude must be non-negative");
    require(a > 0.0, ErrorCode::InvalidArgument, "interior half-width must be positive");
    return OddExteriorData{shape, amplitude, a};
}

} // namespace deadcore
