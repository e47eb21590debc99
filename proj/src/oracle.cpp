#include "softdtw/oracle.hpp"

#include <algorithm>
#include <string>

namespace softdtw::oracle {

namespace {

void check_guard(Eigen::Index n, Eigen::Index m) {
    if (n < 1 || m < 1) throw std::domain_error("alignment sizes must be positive");
    std::uint64_t count = 0;
    try {
        count = delannoy(static_cast<std::uint64_t>(n - 1), static_cast<std::uint64_t>(m - 1));
    } catch (const std::overflow_error&) {
        throw std::length_error("refusing to enumerate: alignment count overflows 64 bits");
    }
    if (count > kMaxAlignments)
        throw std::length_error("refusing to enumerate " + std::to_string(count) +
                                " alignments (limit " + std::to_string(kMaxAlignments) + ")");
}

void extend(Eigen::Index n, Eigen::Index m, AlignmentPath& prefix,
            std::vector<AlignmentPath>& out) {
    const Cell last = prefix.cells.back();
    if (last.i == n - 1 && last.j == m - 1) {
        out.push_back(prefix);
        return;
    }
    static constexpr Cell kSteps[] = {{1, 1}, {1, 0}, {0, 1}};
    for (const Cell& s : kSteps) {
        const Cell next{last.i + s.i, last.j + s.j};
        if (next.i >= n || next.j >= m) continue;
        prefix.cells.push_back(next);
        extend(n, m, prefix, out);
        prefix.cells.pop_back();
    }
}

std::vector<double> path_costs(const std::vector<AlignmentPath>& paths, const CostMatrix& delta) {
    std::vector<double> costs;
    costs.reserve(paths.size());
    for (const auto& p : paths) costs.push_back(p.cost(delta));
    return costs;
}

}  // namespace

std::uint64_t delannoy(std::uint64_t a, std::uint64_t b) {
    std::vector<std::uint64_t> row(b + 1, 1);
    for (std::uint64_t i = 1; i <= a; ++i) {
        std::uint64_t diag = row[0];
        for (std::uint64_t j = 1; j <= b; ++j) {
            const std::uint64_t up = row[j];
            std::uint64_t v = 0;
            if (__builtin_add_overflow(up, row[j - 1], &v) || __builtin_add_overflow(v, diag, &v))
                throw std::overflow_error("delannoy number exceeds 64 bits");
            diag = up;
            row[j] = v;
        }
    }
    return row[b];
}

std::vector<AlignmentPath> enumerate_paths(Eigen::Index n, Eigen::Index m) {
    check_guard(n, m);
    std::vector<AlignmentPath> out;
    AlignmentPath prefix;
    prefix.cells.push_back({0, 0});
    extend(n, m, prefix, out);
    return out;
}

std::vector<Matrix> enumerate_alignments(Eigen::Index n, Eigen::Index m) {
    std::vector<Matrix> out;
    for (const auto& p : enumerate_paths(n, m)) out.push_back(p.to_matrix(n, m));
    return out;
}

double brute_force_sdtw(const TimeSeries& x, const TimeSeries& y, Gamma gamma) {
    const CostMatrix delta = cost_matrix(x, y);
    const auto costs = path_costs(enumerate_paths(x.length(), y.length()), delta);
    return soft_min(costs, gamma);
}

Matrix brute_force_expected_alignment(const TimeSeries& x, const TimeSeries& y, Gamma gamma) {
    if (gamma.hard()) throw std::invalid_argument("expected alignment needs gamma > 0");
    const CostMatrix delta = cost_matrix(x, y);
    const auto n = x.length();
    const auto m = y.length();
    const auto paths = enumerate_paths(n, m);
    const auto costs = path_costs(paths, delta);
    const double lo = *std::min_element(costs.begin(), costs.end());

    Matrix acc = Matrix::Zero(n, m);
    double total = 0.0;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const double w = std::exp(-(costs[k] - lo) / gamma.value());
        total += w;
        for (const auto& c : paths[k].cells) acc(c.i, c.j) += w;
    }
    return acc / total;
}

Matrix average_alignment_forward(const TimeSeries& x, const TimeSeries& y, Gamma gamma) {
    if (gamma.hard()) throw std::invalid_argument("average alignment needs gamma > 0");
    const auto n = x.length();
    const auto m = y.length();
    if (n * m > kMaxForwardCells)
        throw std::length_error("average_alignment_forward limited to n*m <= " +
                                std::to_string(kMaxForwardCells));

    const CostMatrix delta = cost_matrix(x, y);
    const ForwardTable table = sdtw_forward(delta, gamma);
    const Matrix& r = table.r;
    const double g = gamma.value();

    // avg[i][j] (one-based, borders zero) is the average alignment of the
    // prefix problem ending at (i, j), zero-padded to n x m. The unnormalized
    // accumulation
    //   M(i,j) = exp(-delta_ij/g) (M(i-1,j-1) + M(i-1,j) + M(i,j-1)) + exp(-r_ij/g) 1_ij
    // is stored divided by exp(-r_ij/g), so predecessors enter with weights
    // exp((r_ij - delta_ij - r_pred)/g), which sum to one.
    std::vector<Matrix> avg(static_cast<std::size_t>((n + 1) * (m + 1)), Matrix::Zero(n, m));
    auto at = [&](Eigen::Index i, Eigen::Index j) -> Matrix& {
        return avg[static_cast<std::size_t>(i * (m + 1) + j)];
    };

    for (Eigen::Index i = 1; i <= n; ++i) {
        for (Eigen::Index j = 1; j <= m; ++j) {
            Matrix& cur = at(i, j);
            if (i == 1 && j == 1) {
                cur(0, 0) = 1.0;
                continue;
            }
            const double base = r(i, j) - delta(i - 1, j - 1);
            const std::pair<Eigen::Index, Eigen::Index> preds[] = {
                {i - 1, j - 1}, {i - 1, j}, {i, j - 1}};
            for (const auto& [pi, pj] : preds) {
                const double rp = r(pi, pj);
                if (rp == kInf) continue;
                cur += std::exp((base - rp) / g) * at(pi, pj);
            }
            cur(i - 1, j - 1) = 1.0;
        }
    }
    return at(n, m);
}

Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double step) {
    Matrix grad(x.rows(), x.cols());
    Matrix probe = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double orig = probe(k);
        probe(k) = orig + step;
        const double plus = f(probe);
        probe(k) = orig - step;
        const double minus = f(probe);
        probe(k) = orig;
        grad(k) = (plus - minus) / (2.0 * step);
    }
    return grad;
}

double relative_error(const Matrix& a, const Matrix& b) {
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

double relative_error(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace softdtw::oracle
