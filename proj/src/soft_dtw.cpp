#include "softdtw/soft_dtw.hpp"

#include <algorithm>

#include "softdtw/parallel.hpp"

namespace softdtw {

namespace {

// exp() of a nonpositive backward-pass exponent; anything below the double
// underflow threshold is an exact zero contribution.
inline double exp_clamped(double z) {
    return z < -745.0 ? 0.0 : std::exp(z);
}

}  // namespace

double soft_min(std::span<const double> values, Gamma gamma) {
    if (values.empty()) throw std::domain_error("soft_min of an empty set");
    const double lo = *std::min_element(values.begin(), values.end());
    if (gamma.hard() || lo == kInf) return lo;
    const double g = gamma.value();
    double s = 0.0;
    for (double v : values) s += std::exp((lo - v) / g);
    return lo - g * std::log(s);
}

double squared_euclidean_cost(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    if (a.size() != b.size()) throw std::domain_error("cost between vectors of different dimension");
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

CostMatrix cost_matrix(const TimeSeries& x, const TimeSeries& y) {
    if (x.dims() != y.dims())
        throw std::domain_error("time series have different feature dimensions");
    const auto n = x.length();
    const auto m = y.length();
    CostMatrix delta(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            delta(i, j) = squared_euclidean_cost(x.step(i), y.step(j));
    return delta;
}

ForwardTable sdtw_forward(const CostMatrix& delta, Gamma gamma) {
    const auto n = delta.rows();
    const auto m = delta.cols();
    if (n < 1 || m < 1) throw std::domain_error("empty cost matrix");

    ForwardTable t;
    t.gamma = gamma;
    t.r.resize(n + 1, m + 1);
    t.r.row(0).setConstant(kInf);
    t.r.col(0).setConstant(kInf);
    t.r(0, 0) = 0.0;

    const double g = gamma.value();
    for (Eigen::Index j = 1; j <= m; ++j)
        for (Eigen::Index i = 1; i <= n; ++i)
            t.r(i, j) = delta(i - 1, j - 1) +
                        soft_min3(t.r(i - 1, j - 1), t.r(i - 1, j), t.r(i, j - 1), g);
    t.value = t.r(n, m);
    return t;
}

ForwardTable sdtw_forward(const TimeSeries& x, const TimeSeries& y, Gamma gamma) {
    return sdtw_forward(cost_matrix(x, y), gamma);
}

double sdtw_value(const CostMatrix& delta, Gamma gamma) {
    const auto n = delta.rows();
    const auto m = delta.cols();
    if (n < 1 || m < 1) throw std::domain_error("empty cost matrix");

    const double g = gamma.value();
    Vector prev = Vector::Constant(n + 1, kInf);
    Vector cur(n + 1);
    prev[0] = 0.0;
    for (Eigen::Index j = 1; j <= m; ++j) {
        cur[0] = kInf;
        for (Eigen::Index i = 1; i <= n; ++i)
            cur[i] = delta(i - 1, j - 1) + soft_min3(prev[i - 1], prev[i], cur[i - 1], g);
        std::swap(prev, cur);
    }
    return prev[n];
}

double sdtw_value(const TimeSeries& x, const TimeSeries& y, Gamma gamma) {
    return sdtw_value(cost_matrix(x, y), gamma);
}

AlignmentGradient sdtw_backward(const ForwardTable& table, const CostMatrix& delta) {
    if (table.gamma.hard())
        throw std::invalid_argument("sdtw_backward needs gamma > 0; use optimal_path_backtrack");
    const auto n = table.rows();
    const auto m = table.cols();
    if (delta.rows() != n || delta.cols() != m)
        throw std::invalid_argument("cost matrix does not match forward table");

    // One-based, padded by one extra row and column at the end.
    Matrix r(n + 2, m + 2);
    r.topLeftCorner(n + 1, m + 1) = table.r;
    r.row(n + 1).setConstant(-kInf);
    r.col(m + 1).setConstant(-kInf);
    r(n + 1, m + 1) = table.r(n, m);

    Matrix d = Matrix::Zero(n + 2, m + 2);
    d.block(1, 1, n, m) = delta;

    Matrix e = Matrix::Zero(n + 2, m + 2);
    e(n + 1, m + 1) = 1.0;

    const double g = table.gamma.value();
    for (Eigen::Index j = m; j >= 1; --j) {
        for (Eigen::Index i = n; i >= 1; --i) {
            const double rij = r(i, j);
            const double a = exp_clamped((r(i + 1, j) - rij - d(i + 1, j)) / g);
            const double b = exp_clamped((r(i, j + 1) - rij - d(i, j + 1)) / g);
            const double c = exp_clamped((r(i + 1, j + 1) - rij - d(i + 1, j + 1)) / g);
            e(i, j) = e(i + 1, j) * a + e(i, j + 1) * b + e(i + 1, j + 1) * c;
        }
    }
    return e.block(1, 1, n, m);
}

AlignmentPath optimal_path_backtrack(const ForwardTable& table, const CostMatrix& delta) {
    if (!table.gamma.hard())
        throw std::invalid_argument("optimal_path_backtrack needs a gamma = 0 table");
    const auto n = table.rows();
    const auto m = table.cols();
    if (delta.rows() != n || delta.cols() != m)
        throw std::invalid_argument("cost matrix does not match forward table");

    const Matrix& r = table.r;
    AlignmentPath path;
    path.cells.reserve(static_cast<std::size_t>(n + m - 1));
    Eigen::Index i = n;
    Eigen::Index j = m;
    path.cells.push_back({i - 1, j - 1});
    while (i > 1 || j > 1) {
        const double diag = r(i - 1, j - 1);
        const double up = r(i - 1, j);
        const double left = r(i, j - 1);
        const double best = std::min(diag, std::min(up, left));
        if (diag == best) {
            --i;
            --j;
        } else if (up == best) {
            --i;
        } else {
            --j;
        }
        path.cells.push_back({i - 1, j - 1});
    }
    std::reverse(path.cells.begin(), path.cells.end());
    return path;
}

Matrix AlignmentPath::to_matrix(Eigen::Index n, Eigen::Index m) const {
    Matrix a = Matrix::Zero(n, m);
    for (const auto& c : cells) a(c.i, c.j) = 1.0;
    return a;
}

double AlignmentPath::cost(const CostMatrix& delta) const {
    double s = 0.0;
    for (const auto& c : cells) s = delta(c.i, c.j) + s;
    return s;
}

bool AlignmentPath::valid(Eigen::Index n, Eigen::Index m) const {
    if (cells.empty() || cells.front() != Cell{0, 0} || cells.back() != Cell{n - 1, m - 1})
        return false;
    for (std::size_t k = 1; k < cells.size(); ++k) {
        const auto di = cells[k].i - cells[k - 1].i;
        const auto dj = cells[k].j - cells[k - 1].j;
        if (di < 0 || dj < 0 || di > 1 || dj > 1 || di + dj == 0) return false;
    }
    return true;
}

Matrix jacobian_apply(const TimeSeries& x, const TimeSeries& y, const Matrix& b) {
    if (x.dims() != y.dims() || b.rows() != x.length() || b.cols() != y.length())
        throw std::domain_error("jacobian_apply: shape mismatch");
    const Vector row_sums = b.rowwise().sum();
    Matrix g = x.values() * row_sums.asDiagonal();
    g.noalias() -= y.values() * b.transpose();
    return 2.0 * g;
}

ValueAndGradient sdtw_value_and_grad(const TimeSeries& x, const TimeSeries& y, Gamma gamma) {
    const CostMatrix delta = cost_matrix(x, y);
    const ForwardTable table = sdtw_forward(delta, gamma);
    ValueAndGradient out;
    out.value = table.value;
    if (gamma.hard()) {
        const auto path = optimal_path_backtrack(table, delta);
        out.gradient = jacobian_apply(x, y, path.to_matrix(x.length(), y.length()));
    } else {
        out.gradient = jacobian_apply(x, y, sdtw_backward(table, delta));
    }
    return out;
}

std::vector<double> sdtw_batch(std::span<const SeriesPair> pairs, Gamma gamma, unsigned threads) {
    std::vector<double> out(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        out[k] = sdtw_value(pairs[k].first, pairs[k].second, gamma);
    });
    return out;
}

}  // namespace softdtw
