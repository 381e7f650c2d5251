#pragma once

#include "deadcore/grid.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace deadcore {

/// c_{n,s} = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|), the constant for which
/// (-Delta)^s tends to -Delta as s -> 1. Accepts s in (0, 0.999].
double normalization_constant(int n, double s);

struct QuadratureConfig {
    int singular_cell_order = 2;
    /// Subtract the averaged piecewise-linear interpolation defect from the
    /// singular-cell coefficient. Keeps every weight positive.
    bool interpolation_defect_correction = true;
};

/// Reference-lattice integrals used by the weights, in units of c h^{-2s}.
/// Exposed for tests.
namespace kernel_moments {
/// Full hat centred at offset k >= 2 against t^{-1-2s}.
double full_hat(double s, std::size_t k);
/// Inner half hat (rising from k-1 to k) against t^{-1-2s}; k >= 2.
double half_hat(double s, std::size_t k);
/// Descending half of the hat at offset 1, restricted to t >= 1.
double first_cell(double s);
/// sum_k int_k^{k+1} (t - k)(k + 1 - t) t^{-1-2s} dt.
double interpolation_defect(double s);
} // namespace kernel_moments

/// Discrete fractional Laplacian on the interior nodes of a grid.
///
/// For a grid function u the value at interior node i is
///   (A u_int + b(u_ext))_i  ~  (-Delta)^s u(x_i),
/// where A is the dense symmetric matrix over interior nodes and b collects the
/// exterior nodal data plus the analytic contribution of the tail beyond R.
/// Pairs (i, j) are coupled through the exact kernel integral of the hat
/// function at x_j; the singular cell |y - x_i| < h is replaced by a second
/// difference. All couplings are positive, so A is an M-matrix.
class FracLapOperator {
public:
    double s() const noexcept { return s_; }
    double c() const noexcept { return c_; }
    const GridPtr& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& matrix() const noexcept { return A_; }
    std::size_t unknowns() const noexcept { return static_cast<std::size_t>(A_.rows()); }

    /// Kernel mass coupling interior node `node_i` with any other node `node_j` (>= 0).
    double coupling(std::size_t node_i, std::size_t node_j) const;
    /// c * int_{|y|>R} |x_i - y|^{-1-2s} dy for interior slot k.
    double far_field_mass(std::size_t slot) const { return far_mass_[slot]; }

    /// Load vector b(g) over interior slots from exterior nodal values and the tail of g.
    Eigen::VectorXd load(const GridFunction& g) const;

    /// c * int_{|y|>R} tail(y) |x - y|^{-1-2s} dy.
    double tail_integral(const TailModel& tail, double x) const;

private:
    friend FracLapOperator assemble(const GridPtr& grid, double s, const QuadratureConfig& qc);

    double s_ = 0.0;
    double c_ = 0.0;
    double scale_ = 0.0; // c h^{-2s}
    GridPtr grid_;
    std::vector<double> offset_weight_; // per lattice offset, unscaled; [0] unused
    std::vector<double> endpoint_weight_; // half-hat weights per offset, unscaled
    std::vector<double> far_mass_;
    Eigen::MatrixXd A_;
};

/// Requires s in [1/2, 0.999].
FracLapOperator assemble(const GridPtr& grid, double s, const QuadratureConfig& qc = {});

/// Interior values A u_int + b(u); exterior entries are NaN.
GridFunction apply(const FracLapOperator& op, const GridFunction& u);

/// Rows `i,j,weight` of A (interior slots), row-major, 17 significant digits.
void write_operator_csv(const FracLapOperator& op, std::ostream& out);

} // namespace deadcore
