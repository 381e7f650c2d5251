#include "deadcore/grid.hpp"

#include "deadcore/error.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace deadcore {

namespace {

bool near_integer(double v, double& rounded) {
    rounded = std::round(v);
    return std::abs(v - rounded) <= 1e-9 * std::max(1.0, std::abs(v));
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "not a number: '" + text + "'");
    }
    if (used != text.size()) {
        fail(ErrorCode::ParseError, "trailing characters in number: '" + text + "'");
    }
    return v;
}

// int_R^inf y^-p / (1 + y^q) dy for R >= 1.25 via the alternating expansion in y^-q.
double far_weight_series(double R, double p, double q) {
    double sum = 0.0;
    for (int m = 0; m < 4000; ++m) {
        const double e = p + q * (m + 1) - 1.0;
        const double term = std::pow(R, -e) / e;
        sum += (m % 2 == 0) ? term : -term;
        if (term < 1e-18 * std::abs(sum)) {
            break;
        }
    }
    return sum;
}

double far_weight_integral(double R, double p, double q) {
    constexpr double split = 1.25;
    if (R >= split) {
        return far_weight_series(R, p, q);
    }
    static const detail::GaussRule rule = detail::gauss_legendre(20);
    const auto f = [p, q](double y) { return std::pow(y, -p) / (1.0 + std::pow(y, q)); };
    double acc = 0.0;
    constexpr int panels = 16;
    const double step = (split - R) / panels;
    for (int k = 0; k < panels; ++k) {
        acc += detail::integrate(rule, f, R + k * step, R + (k + 1) * step);
    }
    return acc + far_weight_series(split, p, q);
}

} // namespace

void validate(const GridSpec& spec) {
    require(spec.dim == 1, ErrorCode::InvalidArgument, "only 1D grids are supported");
    require(spec.a > 0.0 && spec.R > 0.0 && spec.h > 0.0, ErrorCode::InvalidArgument,
            "grid parameters a, R, h must be positive");
    double na = 0.0, nr = 0.0;
    require(near_integer(spec.a / spec.h, na), ErrorCode::InvalidArgument, "a/h is not an integer");
    require(near_integer(spec.R / spec.h, nr), ErrorCode::InvalidArgument, "R/h is not an integer");
    require(na >= 4 && nr >= 4, ErrorCode::InvalidArgument, "a/h and R/h must be at least 4");
    require(spec.R >= 2.0 * spec.a - 1e-12, ErrorCode::InvalidArgument, "truncation radius must satisfy R >= 2a");
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
    validate(spec);
    const auto half = static_cast<std::size_t>(std::llround(spec.R / spec.h));
    const std::size_t count = 2 * half + 1;
    nodes_.resize(count);
    interior_slot_.assign(count, -1);
    const double cutoff = spec.a - 1e-9 * spec.h;
    for (std::size_t i = 0; i < count; ++i) {
        nodes_[i] = -spec.R + static_cast<double>(i) * spec.h;
        if (std::abs(nodes_[i]) < cutoff) {
            interior_slot_[i] = static_cast<std::ptrdiff_t>(interior_.size());
            interior_.push_back(i);
        } else {
            exterior_.push_back(i);
        }
    }
}

bool Grid::operator==(const Grid& other) const noexcept {
    return spec_.a == other.spec_.a && spec_.R == other.spec_.R && spec_.h == other.spec_.h &&
           spec_.dim == other.spec_.dim;
}

GridPtr make_grid(const GridSpec& spec) { return std::make_shared<const Grid>(spec); }

double TailModel::operator()(double y) const noexcept {
    double magnitude = 0.0;
    switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: magnitude = coefficient; break;
    case Kind::Power: magnitude = coefficient * std::pow(std::abs(y), -exponent); break;
    }
    return (parity == Parity::Odd && y < 0.0) ? -magnitude : magnitude;
}

TailModel TailModel::scaled(double factor) const noexcept {
    TailModel t = *this;
    t.coefficient *= factor;
    return t;
}

std::string TailModel::encode() const {
    const std::string prefix = parity == Parity::Odd ? "odd-" : "";
    switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return prefix + "const:" + fmt17(coefficient);
    case Kind::Power: return prefix + "power:" + fmt17(coefficient) + "," + fmt17(exponent);
    }
    return "zero";
}

TailModel TailModel::decode(const std::string& text) {
    if (text == "zero") {
        return zero();
    }
    std::string body = text;
    Parity parity = Parity::Even;
    if (body.rfind("odd-", 0) == 0) {
        parity = Parity::Odd;
        body = body.substr(4);
    }
    if (body.rfind("const:", 0) == 0) {
        return constant(parse_double(body.substr(6)), parity);
    }
    if (body.rfind("power:", 0) == 0) {
        const std::string args = body.substr(6);
        const auto comma = args.find(',');
        require(comma != std::string::npos, ErrorCode::ParseError, "power tail needs '<c>,<p>'");
        TailModel t = power(parse_double(args.substr(0, comma)), parse_double(args.substr(comma + 1)), parity);
        validate(t);
        return t;
    }
    fail(ErrorCode::ParseError, "unknown tail model '" + text + "'");
}

void validate(const TailModel& tail) {
    require(std::isfinite(tail.coefficient), ErrorCode::InvalidArgument, "tail coefficient must be finite");
    if (tail.kind == TailModel::Kind::Power) {
        require(tail.exponent > 0.0 && std::isfinite(tail.exponent), ErrorCode::InvalidArgument,
                "power tail needs a positive decay exponent");
    }
}

GridFunction::GridFunction(GridPtr g, std::vector<double> v, TailModel t)
    : grid(std::move(g)), values(std::move(v)), tail(t) {
    require(grid != nullptr, ErrorCode::InvalidArgument, "grid function without grid");
    require(values.size() == grid->size(), ErrorCode::GridMismatch, "value count does not match grid size");
    validate(tail);
}

std::vector<double> GridFunction::interior_values() const {
    std::vector<double> out;
    out.reserve(grid->interior().size());
    for (const auto i : grid->interior()) {
        out.push_back(values[i]);
    }
    return out;
}

GridFunction sample(const ScalarFunction& f, const GridPtr& grid, const TailModel& tail) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = f(grid->x(i));
        require(std::isfinite(v[i]), ErrorCode::InvalidArgument,
                "sampled function is not finite at x = " + fmt17(grid->x(i)));
    }
    return GridFunction(grid, std::move(v), tail);
}

bool in_ball(const Grid& grid, std::size_t i, double x0, double r) noexcept {
    return std::abs(grid.x(i) - x0) <= r + 1e-9 * grid.h();
}

namespace {

void check_ball(const Grid& grid, double x0, double r) {
    const double slack = 1e-9 * grid.h();
    require(r >= grid.h() - slack, ErrorCode::InvalidArgument, "ball radius below grid spacing");
    require(x0 - r >= -grid.R() - slack && x0 + r <= grid.R() + slack, ErrorCode::BallExitsGrid,
            "ball B_" + fmt17(r) + "(" + fmt17(x0) + ") exits the grid");
}

} // namespace

double sup_on_ball(const GridFunction& u, double x0, double r) {
    const Grid& grid = *u.grid;
    check_ball(grid, x0, r);
    const double lattice = grid.lattice_coordinate(x0);
    const double span = r / grid.h() + 1.0;
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(lattice - span)));
    const auto hi = std::min(grid.size() - 1, static_cast<std::size_t>(std::ceil(lattice + span)));
    double sup = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (in_ball(grid, i, x0, r)) {
            sup = std::max(sup, std::abs(u.values[i]));
        }
    }
    return sup;
}

GridFunction discrete_derivative(const GridFunction& u, int order) {
    require(order == 1 || order == 2, ErrorCode::InvalidArgument, "derivative order must be 1 or 2");
    const std::size_t n = u.size();
    require(n >= 5, ErrorCode::InvalidArgument, "derivative needs at least 5 nodes");
    const double h = u.grid->h();
    const auto& v = u.values;
    std::vector<double> d(n);
    if (order == 1) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    } else {
        const double h2 = h * h;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    }
    return GridFunction(u.grid, std::move(d), TailModel::zero());
}

double holder_seminorm(const GridFunction& u, double alpha, double x0, double r, int order) {
    require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument, "Holder exponent must lie in (0, 1]");
    require(order >= 0 && order <= 2, ErrorCode::InvalidArgument, "Holder order must be 0, 1 or 2");
    const Grid& grid = *u.grid;
    check_ball(grid, x0, r);
    const GridFunction du = order == 0 ? u : discrete_derivative(u, order);
    std::vector<std::size_t> ball;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (in_ball(grid, i, x0, r)) {
            ball.push_back(i);
        }
    }
    require(ball.size() >= 2, ErrorCode::InvalidArgument, "Holder seminorm needs two nodes in the ball");
    double best = 0.0;
    for (std::size_t p = 0; p < ball.size(); ++p) {
        for (std::size_t q = p + 1; q < ball.size(); ++q) {
            const double dist = grid.x(ball[q]) - grid.x(ball[p]);
            best = std::max(best, std::abs(du.values[ball[q]] - du.values[ball[p]]) / std::pow(dist, alpha));
        }
    }
    return best;
}

double tail_norm_far_field(const TailModel& tail, double R, double s) {
    require(s > 0.0 && s < 1.0, ErrorCode::InvalidArgument, "s must lie in (0, 1)");
    if (tail.is_zero()) {
        return 0.0;
    }
    const double p = tail.kind == TailModel::Kind::Power ? tail.exponent : 0.0;
    return 2.0 * std::abs(tail.coefficient) * far_weight_integral(R, p, 1.0 + 2.0 * s);
}

double tail_norm(const GridFunction& u, double s) {
    require(s > 0.0 && s < 1.0, ErrorCode::InvalidArgument, "s must lie in (0, 1)");
    const Grid& grid = *u.grid;
    const double q = 1.0 + 2.0 * s;
    double acc = 0.0;
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        acc += w * std::abs(u.values[i]) / (1.0 + std::pow(std::abs(grid.x(i)), q));
    }
    return grid.h() * acc + tail_norm_far_field(u.tail, grid.R(), s);
}

} // namespace deadcore
