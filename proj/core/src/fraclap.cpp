#include "deadcore/fraclap.hpp"

#include "deadcore/error.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace deadcore {

double normalization_constant(int n, double s) {
    require(n >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
    require(s > 0.0 && s < 1.0, ErrorCode::InvalidArgument, "s must lie in (0, 1)");
    require(s <= 0.999, ErrorCode::InvalidArgument, "s > 0.999: normalization constant degenerates");
    const double half_n = 0.5 * n;
    return std::pow(4.0, s) * std::tgamma(half_n + s) /
           (std::pow(std::numbers::pi, half_n) * std::abs(std::tgamma(-s)));
}

namespace kernel_moments {

// With q = 1 - 2s, G(t) = t^q / (q (q - 1)) satisfies G'' = t^{-1-2s}; the hat
// integrals are second differences of G, rewritten with log1p/expm1 so that
// the cancellation costs only O(k) ulps.

double full_hat(double s, std::size_t k) {
    const double q = 1.0 - 2.0 * s;
    const double kd = static_cast<double>(k);
    const double up = std::log1p(1.0 / kd);
    const double down = std::log1p(-1.0 / kd);
    const double bracket = up * detail::expm1_ratio(q * up) + down * detail::expm1_ratio(q * down);
    return std::pow(kd, q) * bracket / (q - 1.0);
}

double half_hat(double s, std::size_t k) {
    // G'(k) - G(k) + G(k-1)
    const double q = 1.0 - 2.0 * s;
    const double kd = static_cast<double>(k);
    const double down = std::log1p(-1.0 / kd);
    return std::pow(kd, q - 1.0) / (q - 1.0) * (1.0 + kd * down * detail::expm1_ratio(q * down));
}

double first_cell(double s) {
    // int_1^2 (2 - t) t^{-1-2s} dt = G(2) - G(1) - G'(1)
    const double q = 1.0 - 2.0 * s;
    const double l2 = std::numbers::ln2;
    return (l2 * detail::expm1_ratio(q * l2) - 1.0) / (q - 1.0);
}

double interpolation_defect(double s) {
    static const detail::GaussRule rule = detail::gauss_legendre(12);
    constexpr int cells = 2000;
    double sum = 0.0;
    for (int k = cells; k >= 1; --k) {
        const double kd = k;
        sum += detail::integrate(
            rule, [kd, s](double t) { return (t - kd) * (kd + 1.0 - t) * std::pow(t, -1.0 - 2.0 * s); }, kd,
            kd + 1.0);
    }
    // beyond the last cell: mean 1/6 of the periodic factor plus its Euler-Maclaurin correction
    const double n = cells + 1.0;
    return sum + std::pow(n, -2.0 * s) / (12.0 * s) - (1.0 + 2.0 * s) * std::pow(n, -2.0 - 2.0 * s) / 360.0;
}

} // namespace kernel_moments

namespace {

// int_R^inf y^-p (y - x)^{-1-2s} dy, |x| <= R/2, via the binomial series in x/R.
double power_tail_side(double R, double p, double s, double x) {
    const double ratio = x / R;
    double coef = 1.0; // (1+2s)_m / m!
    double pw = 1.0;
    double sum = 0.0;
    for (int m = 0; m < 400; ++m) {
        const double term = coef * pw / (p + 2.0 * s + m);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) {
            break;
        }
        coef *= (1.0 + 2.0 * s + m) / (m + 1.0);
        pw *= ratio;
    }
    return std::pow(R, -p - 2.0 * s) * sum;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

double FracLapOperator::coupling(std::size_t node_i, std::size_t node_j) const {
    const std::size_t k = node_i > node_j ? node_i - node_j : node_j - node_i;
    if (k == 0) {
        return 0.0;
    }
    const bool endpoint = node_j == 0 || node_j + 1 == grid_->size();
    return scale_ * (endpoint ? endpoint_weight_[k] : offset_weight_[k]);
}

double FracLapOperator::tail_integral(const TailModel& tail, double x) const {
    if (tail.is_zero()) {
        return 0.0;
    }
    const double R = grid_->R();
    const double sign = tail.parity == TailModel::Parity::Odd ? -1.0 : 1.0;
    double right = 0.0, left = 0.0;
    if (tail.kind == TailModel::Kind::Constant) {
        right = std::pow(R - x, -2.0 * s_) / (2.0 * s_);
        left = std::pow(R + x, -2.0 * s_) / (2.0 * s_);
    } else {
        right = power_tail_side(R, tail.exponent, s_, x);
        left = power_tail_side(R, tail.exponent, s_, -x);
    }
    return c_ * tail.coefficient * (right + sign * left);
}

Eigen::VectorXd FracLapOperator::load(const GridFunction& g) const {
    require(g.grid && *g.grid == *grid_, ErrorCode::GridMismatch, "exterior data lives on a different grid");
    const auto interior = grid_->interior();
    const auto exterior = grid_->exterior();
    Eigen::VectorXd b(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const std::size_t i = interior[k];
        double acc = 0.0;
        for (const auto j : exterior) {
            acc += coupling(i, j) * g.values[j];
        }
        b[static_cast<Eigen::Index>(k)] = -acc - tail_integral(g.tail, grid_->x(i));
    }
    return b;
}

FracLapOperator assemble(const GridPtr& grid, double s, const QuadratureConfig& qc) {
    require(grid != nullptr, ErrorCode::InvalidArgument, "assemble needs a grid");
    require(s >= 0.5 && s <= 0.999, ErrorCode::InvalidArgument, "assemble requires s in [1/2, 0.999]");
    require(qc.singular_cell_order == 2, ErrorCode::InvalidArgument, "only the second-order singular cell is implemented");

    FracLapOperator op;
    op.s_ = s;
    op.c_ = normalization_constant(1, s);
    op.grid_ = grid;
    const double h = grid->h();
    op.scale_ = op.c_ * std::pow(h, -2.0 * s);

    const std::size_t n = grid->size();
    op.offset_weight_.assign(n, 0.0);
    op.endpoint_weight_.assign(n, 0.0);
    double near = 1.0 / (2.0 - 2.0 * s);
    if (qc.interpolation_defect_correction) {
        near -= kernel_moments::interpolation_defect(s);
    }
    op.offset_weight_[1] = kernel_moments::first_cell(s) + near;
    for (std::size_t k = 2; k < n; ++k) {
        op.offset_weight_[k] = kernel_moments::full_hat(s, k);
        op.endpoint_weight_[k] = kernel_moments::half_hat(s, k);
    }

    // prefix[k] = sum_{m=1..k} offset_weight_[m]
    std::vector<double> prefix(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        prefix[k] = prefix[k - 1] + op.offset_weight_[k];
    }

    const auto interior = grid->interior();
    const auto m = static_cast<Eigen::Index>(interior.size());
    op.A_.resize(m, m);
    op.far_mass_.resize(interior.size());
    const double R = grid->R();
    for (Eigen::Index r = 0; r < m; ++r) {
        const std::size_t i = interior[static_cast<std::size_t>(r)];
        const double x = grid->x(i);
        op.far_mass_[static_cast<std::size_t>(r)] =
            op.c_ * (std::pow(R - x, -2.0 * s) + std::pow(R + x, -2.0 * s)) / (2.0 * s);
        // nodes 1..i-1 on the left, i+1..n-2 on the right, half hats at 0 and n-1
        const double row_mass = prefix[i - 1] + prefix[n - 2 - i] + op.endpoint_weight_[i] +
                                 op.endpoint_weight_[n - 1 - i];
        for (Eigen::Index col = 0; col < m; ++col) {
            const std::size_t j = interior[static_cast<std::size_t>(col)];
            op.A_(r, col) = -op.coupling(i, j);
        }
        op.A_(r, r) = op.scale_ * row_mass + op.far_mass_[static_cast<std::size_t>(r)];
    }
    return op;
}

GridFunction apply(const FracLapOperator& op, const GridFunction& u) {
    require(u.grid && *u.grid == *op.grid(), ErrorCode::GridMismatch, "grid function lives on a different grid");
    const auto interior = op.grid()->interior();
    Eigen::VectorXd ui(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k) {
        ui[static_cast<Eigen::Index>(k)] = u.values[interior[k]];
    }
    const Eigen::VectorXd out = op.matrix() * ui + op.load(u);
    std::vector<double> values(u.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < interior.size(); ++k) {
        values[interior[k]] = out[static_cast<Eigen::Index>(k)];
    }
    return GridFunction(op.grid(), std::move(values), TailModel::zero());
}

void write_operator_csv(const FracLapOperator& op, std::ostream& out) {
    out << "i,j,weight\n";
    const auto& A = op.matrix();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out << i << ',' << j << ',' << fmt17(A(i, j)) << '\n';
        }
    }
}

} // namespace deadcore
