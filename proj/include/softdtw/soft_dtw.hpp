#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "softdtw/time_series.hpp"

namespace softdtw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Smoothing parameter. Zero selects the hard minimum (plain DTW).
class Gamma {
public:
    constexpr Gamma() = default;
    explicit Gamma(double value) : value_(value) {
        if (!(value >= 0.0) || !std::isfinite(value))
            throw std::domain_error("gamma must be a finite nonnegative number");
    }
    constexpr double value() const { return value_; }
    constexpr bool hard() const { return value_ == 0.0; }

private:
    double value_ = 0.0;
};

// n x m matrix of substitution costs delta(x_i, y_j).
using CostMatrix = Matrix;
// n x m expected alignment matrix (gradient of the value w.r.t. the cost matrix).
using AlignmentGradient = Matrix;

// Intermediate alignment costs. r is (n+1) x (m+1); row and column 0 hold
// the border (r(0,0) = 0, other border cells +inf). value == r(n, m).
struct ForwardTable {
    Matrix r;
    double value = 0.0;
    Gamma gamma;

    Eigen::Index rows() const { return r.rows() - 1; }
    Eigen::Index cols() const { return r.cols() - 1; }
};

// Zero-based cell of an alignment path.
struct Cell {
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

// Monotone path from (0,0) to (n-1,m-1) using down, right and diagonal steps.
struct AlignmentPath {
    std::vector<Cell> cells;

    Matrix to_matrix(Eigen::Index n, Eigen::Index m) const;
    // Sum of costs along the path, accumulated in path order.
    double cost(const CostMatrix& delta) const;
    bool valid(Eigen::Index n, Eigen::Index m) const;
};

struct ValueAndGradient {
    double value = 0.0;
    Matrix gradient;  // p x n, same shape as x
};

// min_gamma{a_1, ..., a_k}: the hard minimum for gamma = 0, otherwise
// -gamma * log(sum exp(-a_i / gamma)) evaluated with a max shift.
// +inf arguments contribute nothing; all +inf gives +inf.
double soft_min(std::span<const double> values, Gamma gamma);

// Three-argument form used by the recursions.
inline double soft_min3(double a, double b, double c, double gamma) {
    const double lo = std::min(a, std::min(b, c));
    if (gamma == 0.0 || lo == kInf) return lo;
    const double s = std::exp((lo - a) / gamma) + std::exp((lo - b) / gamma) +
                     std::exp((lo - c) / gamma);
    return lo - gamma * std::log(s);
}

double squared_euclidean_cost(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

CostMatrix cost_matrix(const TimeSeries& x, const TimeSeries& y);

ForwardTable sdtw_forward(const CostMatrix& delta, Gamma gamma);
ForwardTable sdtw_forward(const TimeSeries& x, const TimeSeries& y, Gamma gamma);

// Value only, keeping two columns of the table.
double sdtw_value(const CostMatrix& delta, Gamma gamma);
double sdtw_value(const TimeSeries& x, const TimeSeries& y, Gamma gamma);

inline double dtw(const TimeSeries& x, const TimeSeries& y) {
    return sdtw_value(x, y, Gamma{0.0});
}

// Reverse sweep over the stored table; requires gamma > 0.
AlignmentGradient sdtw_backward(const ForwardTable& table, const CostMatrix& delta);

// Optimal alignment for a gamma = 0 table. Ties prefer the diagonal
// predecessor, then (i-1, j), then (i, j-1).
AlignmentPath optimal_path_backtrack(const ForwardTable& table, const CostMatrix& delta);

// Transpose of the Jacobian of the squared Euclidean cost matrix w.r.t. x,
// applied to an n x m matrix b. Returns a p x n matrix.
Matrix jacobian_apply(const TimeSeries& x, const TimeSeries& y, const Matrix& b);

// For gamma > 0 the exact gradient; for gamma = 0 the subgradient given by the
// tie-broken optimal path.
ValueAndGradient sdtw_value_and_grad(const TimeSeries& x, const TimeSeries& y, Gamma gamma);

using SeriesPair = std::pair<TimeSeries, TimeSeries>;

// Values for independent pairs, in input order. Spreads work over `threads`
// workers (0 = hardware concurrency); results match sequential evaluation.
std::vector<double> sdtw_batch(std::span<const SeriesPair> pairs, Gamma gamma,
                               unsigned threads = 0);

}  // namespace softdtw
