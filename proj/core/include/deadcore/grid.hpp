#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace deadcore {

/// Uniform 1D lattice description. Omega = (-a, a) is the interior region; the
/// lattice covers [-R, R] and everything beyond R is represented by a TailModel.
struct GridSpec {
    double a = 1.0; ///< interior half-width
    double R = 4.0; ///< truncation radius
    double h = 1.0 / 64.0;
    int dim = 1;
};

/// Throws Error(InvalidArgument) unless a/h and R/h are integers >= 4, R >= 2a and dim == 1.
void validate(const GridSpec& spec);

class Grid {
public:
    explicit Grid(const GridSpec& spec);

    const GridSpec& spec() const noexcept { return spec_; }
    double h() const noexcept { return spec_.h; }
    double a() const noexcept { return spec_.a; }
    double R() const noexcept { return spec_.R; }

    std::size_t size() const noexcept { return nodes_.size(); }
    double x(std::size_t i) const noexcept { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    std::span<const std::size_t> interior() const noexcept { return interior_; }
    std::span<const std::size_t> exterior() const noexcept { return exterior_; }
    bool is_interior(std::size_t i) const noexcept { return interior_slot_[i] >= 0; }
    /// Position of node i inside interior(), or -1 for exterior nodes.
    std::ptrdiff_t interior_slot(std::size_t i) const noexcept { return interior_slot_[i]; }

    /// Fractional lattice coordinate of x, i.e. (x + R) / h.
    double lattice_coordinate(double x) const noexcept { return (x + spec_.R) / spec_.h; }

    bool operator==(const Grid& other) const noexcept;

private:
    GridSpec spec_;
    std::vector<double> nodes_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> exterior_;
    std::vector<std::ptrdiff_t> interior_slot_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(const GridSpec& spec);

/// Far-field model for |y| > R. Odd parity means the value on y < -R is the
/// negative of the value at |y|.
struct TailModel {
    enum class Kind { Zero, Constant, Power };
    enum class Parity { Even, Odd };

    Kind kind = Kind::Zero;
    Parity parity = Parity::Even;
    double coefficient = 0.0;
    double exponent = 0.0; ///< decay exponent p for Kind::Power

    static TailModel zero() { return {}; }
    static TailModel constant(double c, Parity parity = Parity::Even) { return {Kind::Constant, parity, c, 0.0}; }
    static TailModel power(double c, double p, Parity parity = Parity::Even) { return {Kind::Power, parity, c, p}; }

    /// Value at y with |y| > R.
    double operator()(double y) const noexcept;
    TailModel scaled(double factor) const noexcept;
    bool is_zero() const noexcept { return kind == Kind::Zero || coefficient == 0.0; }

    /// Encoding used in CSV headers: zero | const:<c> | power:<c>,<p>, with an
    /// "odd-" prefix on the last two for odd parity.
    std::string encode() const;
    static TailModel decode(const std::string& text);

    bool operator==(const TailModel&) const = default;
};

void validate(const TailModel& tail);

/// Nodal values on a grid plus the far-field model beyond R.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;
    TailModel tail;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v, TailModel t = {});

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    double& operator[](std::size_t i) noexcept { return values[i]; }

    /// Values restricted to grid->interior(), in that order.
    std::vector<double> interior_values() const;
};

using ScalarFunction = std::function<double(double)>;

GridFunction sample(const ScalarFunction& f, const GridPtr& grid, const TailModel& tail = {});

/// Ball membership with the closed condition |x - x0| <= r + 1e-9 h.
bool in_ball(const Grid& grid, std::size_t i, double x0, double r) noexcept;

double sup_on_ball(const GridFunction& u, double x0, double r);

/// Central differences in the interior, one-sided second-order stencils at the endpoints.
/// order must be 1 or 2.
GridFunction discrete_derivative(const GridFunction& u, int order);

/// Discrete Holder seminorm of the order-th derivative over node pairs inside B_r(x0).
double holder_seminorm(const GridFunction& u, double alpha, double x0, double r, int order);

/// Weighted L^1 norm int |u(y)| / (1 + |y|^(1+2s)) dy: trapezoid rule on [-R, R]
/// plus the far field integrated in closed form from the tail model.
double tail_norm(const GridFunction& u, double s);

/// Far-field part of tail_norm alone.
double tail_norm_far_field(const TailModel& tail, double R, double s);

} // namespace deadcore
