#include "softdtw/barycenter.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "softdtw/lbfgs.hpp"
#include "softdtw/parallel.hpp"

namespace softdtw {

namespace {

// Above this multiple of the starting objective the subgradient run is
// declared divergent.
constexpr double kDivergenceFactor = 1e6;

void check_shape(const TimeSeries& x, const BarycenterProblem& problem) {
    if (x.dims() != problem.dims() || x.length() != problem.target_length())
        throw std::domain_error("barycenter iterate has the wrong shape");
}

double term_weight(const BarycenterProblem& problem, std::size_t i) {
    return problem.weights()[i] / static_cast<double>(problem.series()[i].length());
}

// Gamma = 0 objective together with the optimal path to every series.
struct HardEvaluation {
    double value = 0.0;
    std::vector<AlignmentPath> paths;
};

HardEvaluation evaluate_hard(const TimeSeries& x, const BarycenterProblem& problem,
                             unsigned threads) {
    const auto& ys = problem.series();
    HardEvaluation out;
    out.paths.resize(ys.size());
    std::vector<double> terms(ys.size());
    parallel_for(ys.size(), threads, [&](std::size_t i) {
        const auto delta = cost_matrix(x, ys[i]);
        const auto table = sdtw_forward(delta, Gamma{0.0});
        out.paths[i] = optimal_path_backtrack(table, delta);
        terms[i] = table.value;
    });
    for (std::size_t i = 0; i < ys.size(); ++i) out.value += term_weight(problem, i) * terms[i];
    return out;
}

TimeSeries dba_update(const BarycenterProblem& problem, const std::vector<AlignmentPath>& paths) {
    const auto n = problem.target_length();
    Matrix sums = Matrix::Zero(problem.dims(), n);
    Vector mass = Vector::Zero(n);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const double w = term_weight(problem, i);
        const auto& y = problem.series()[i];
        for (const auto& c : paths[i].cells) {
            sums.col(c.i) += w * y.step(c.j);
            mass[c.i] += w;
        }
    }
    // Every path visits every row, and the weights sum to one.
    if (!(mass.array() > 0.0).all())
        throw std::logic_error("dba: barycenter column aligned to nothing");
    return TimeSeries(Matrix(sums * mass.cwiseInverse().asDiagonal()));
}

}  // namespace

BarycenterProblem::BarycenterProblem(std::vector<TimeSeries> series, std::vector<double> weights,
                                     Eigen::Index target_length)
    : series_(std::move(series)), weights_(std::move(weights)), target_length_(target_length) {
    if (series_.empty()) throw std::domain_error("barycenter problem needs at least one series");
    if (weights_.size() != series_.size())
        throw std::domain_error("one weight per series is required");
    if (target_length_ < 1) throw std::domain_error("barycenter length must be positive");
    for (const auto& s : series_)
        if (s.dims() != series_.front().dims())
            throw std::domain_error("series in a barycenter problem must share their dimension");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("weights must not all be zero");
    for (double& w : weights_) w /= total;
}

BarycenterProblem BarycenterProblem::uniform(std::vector<TimeSeries> series,
                                             Eigen::Index target_length) {
    std::vector<double> w(series.size(), 1.0);
    return BarycenterProblem(std::move(series), std::move(w), target_length);
}

ValueAndGradient barycenter_value_and_grad(const TimeSeries& x, const BarycenterProblem& problem,
                                           Gamma gamma, unsigned threads) {
    check_shape(x, problem);
    const auto& ys = problem.series();
    std::vector<ValueAndGradient> terms(ys.size());
    parallel_for(ys.size(), threads,
                 [&](std::size_t i) { terms[i] = sdtw_value_and_grad(x, ys[i], gamma); });
    ValueAndGradient out;
    out.gradient = Matrix::Zero(x.dims(), x.length());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double w = term_weight(problem, i);
        out.value += w * terms[i].value;
        out.gradient += w * terms[i].gradient;
    }
    return out;
}

double barycenter_objective(const TimeSeries& x, const BarycenterProblem& problem, Gamma gamma,
                            unsigned threads) {
    check_shape(x, problem);
    const auto& ys = problem.series();
    std::vector<double> terms(ys.size());
    parallel_for(ys.size(), threads, [&](std::size_t i) { terms[i] = sdtw_value(x, ys[i], gamma); });
    double total = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) total += term_weight(problem, i) * terms[i];
    return total;
}

Matrix barycenter_gradient(const TimeSeries& x, const BarycenterProblem& problem, Gamma gamma,
                           unsigned threads) {
    return barycenter_value_and_grad(x, problem, gamma, threads).gradient;
}

BarycenterResult soft_barycenter(const BarycenterProblem& problem, Gamma gamma,
                                 const TimeSeries& init, const OptimizerConfig& config) {
    if (gamma.hard()) throw std::invalid_argument("soft_barycenter needs gamma > 0");
    check_shape(init, problem);
    const auto p = init.dims();
    const auto n = init.length();

    const Objective objective = [&](const Vector& flat, Vector& grad) {
        if (!flat.allFinite()) return kInf;
        const TimeSeries x(Matrix(Eigen::Map<const Matrix>(flat.data(), p, n)));
        const auto vg = barycenter_value_and_grad(x, problem, gamma, config.threads);
        grad = Eigen::Map<const Vector>(vg.gradient.data(), vg.gradient.size());
        return vg.value;
    };

    LbfgsOptions options;
    options.max_iterations = config.max_iterations;
    options.gradient_tolerance = config.gradient_tolerance;
    options.relative_tolerance = config.relative_tolerance;
    options.history_size = config.history_size;

    const Vector x0 = Eigen::Map<const Vector>(init.values().data(), init.values().size());
    auto res = lbfgs_minimize(objective, x0, options);

    BarycenterResult out;
    out.barycenter = TimeSeries(Matrix(Eigen::Map<const Matrix>(res.x.data(), p, n)));
    out.trace = std::move(res.trace);
    out.iterations = res.iterations;
    return out;
}

BarycenterResult dba_barycenter(const BarycenterProblem& problem, const TimeSeries& init,
                                const OptimizerConfig& config) {
    check_shape(init, problem);
    BarycenterResult out;
    out.barycenter = init;
    auto current = evaluate_hard(init, problem, config.threads);
    out.trace.push_back(current.value);
    while (out.iterations < config.max_iterations) {
        TimeSeries candidate = dba_update(problem, current.paths);
        auto next = evaluate_hard(candidate, problem, config.threads);
        if (!(next.value < current.value)) break;
        out.barycenter = std::move(candidate);
        current = std::move(next);
        out.trace.push_back(current.value);
        ++out.iterations;
    }
    return out;
}

BarycenterResult subgradient_barycenter(const BarycenterProblem& problem, const TimeSeries& init,
                                        const OptimizerConfig& config) {
    check_shape(init, problem);
    double step0 = config.initial_step;
    if (step0 <= 0.0) {
        double norms = 0.0;
        for (const auto& y : problem.series()) norms += y.values().norm();
        step0 = 0.1 * norms / static_cast<double>(problem.size());
    }

    BarycenterResult out;
    out.barycenter = init;
    const double start = barycenter_objective(init, problem, Gamma{0.0}, config.threads);
    double best = start;
    out.trace.push_back(best);
    Matrix x = init.values();
    for (int t = 1; t <= config.max_iterations; ++t) {
        const Matrix g = barycenter_gradient(TimeSeries(x), problem, Gamma{0.0}, config.threads);
        if (g.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) break;
        x -= (step0 / std::sqrt(static_cast<double>(t))) * g;
        out.iterations = t;
        if (!x.allFinite()) {
            out.diverged = true;
            break;
        }
        const TimeSeries candidate(x);
        const double f = barycenter_objective(candidate, problem, Gamma{0.0}, config.threads);
        if (!std::isfinite(f) || f > kDivergenceFactor * std::max(start, 1e-12)) {
            out.diverged = true;
            break;
        }
        if (f < best) {
            best = f;
            out.barycenter = candidate;
        }
        out.trace.push_back(best);
    }
    return out;
}

TimeSeries init_euclidean_mean(const BarycenterProblem& problem) {
    Matrix acc = Matrix::Zero(problem.dims(), problem.target_length());
    for (std::size_t i = 0; i < problem.size(); ++i) {
        const auto& y = problem.series()[i];
        if (y.length() != problem.target_length())
            throw std::domain_error("Euclidean mean needs every series at the target length");
        acc += problem.weights()[i] * y.values();
    }
    return TimeSeries(std::move(acc));
}

TimeSeries init_random(const BarycenterProblem& problem, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, problem.size() - 1);
    return resample_linear(problem.series()[pick(rng)], problem.target_length());
}

TimeSeries resample_linear(const TimeSeries& series, Eigen::Index length) {
    if (length < 1) throw std::domain_error("resample length must be positive");
    const auto m = series.length();
    if (length == m) return series;
    Matrix out(series.dims(), length);
    for (Eigen::Index k = 0; k < length; ++k) {
        const double pos = length == 1 ? 0.0
                                       : static_cast<double>(k) * static_cast<double>(m - 1) /
                                             static_cast<double>(length - 1);
        const auto lo = std::min(static_cast<Eigen::Index>(pos), m - 1);
        const auto hi = std::min(lo + 1, m - 1);
        const double frac = pos - static_cast<double>(lo);
        out.col(k) = (1.0 - frac) * series.step(lo) + frac * series.step(hi);
    }
    return TimeSeries(std::move(out));
}

}  // namespace softdtw
