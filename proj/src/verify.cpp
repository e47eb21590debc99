#include "softdtw/verify.hpp"

#include <cmath>
#include <random>

#include "softdtw/mlp.hpp"
#include "softdtw/oracle.hpp"
#include "softdtw/random.hpp"
#include "softdtw/soft_dtw.hpp"

namespace softdtw {

namespace {

// Short enough for exhaustive enumeration.
constexpr Eigen::Index kOracleLength = 5;

TimeSeries random_series(std::mt19937_64& rng, Eigen::Index dims, Eigen::Index length) {
    std::normal_distribution<double> normal;
    Matrix m(dims, length);
    for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = normal(rng);
    return TimeSeries(m);
}

Eigen::Index draw(std::mt19937_64& rng, Eigen::Index lo, Eigen::Index hi) {
    return std::uniform_int_distribution<Eigen::Index>(lo, hi)(rng);
}

void record(VerifyCheck& check, double error) {
    ++check.cases;
    if (!(error <= check.worst)) check.worst = std::isnan(error) ? kInf : std::max(check.worst, error);
}

struct Checks {
    VerifyCheck value{"value", 0, 0.0, 1e-10};
    VerifyCheck alignment{"alignment", 0, 0.0, 1e-8};
    VerifyCheck corners{"corners", 0, 0.0, 1e-12};
    VerifyCheck gradient_x{"gradient_x", 0, 0.0, 1e-5};
    VerifyCheck gradient_mlp{"gradient_mlp", 0, 0.0, 1e-4};
    VerifyCheck sandwich{"sandwich", 0, 0.0, 1e-12};

    void oracle_pair(const TimeSeries& x, const TimeSeries& y) {
        for (double g : {0.0, 0.1, 1.0, 10.0}) {
            const Gamma gamma(g);
            record(value, oracle::relative_error(sdtw_forward(x, y, gamma).value,
                                                 oracle::brute_force_sdtw(x, y, gamma)));
            if (gamma.hard()) continue;
            const auto delta = cost_matrix(x, y);
            const Matrix e = sdtw_backward(sdtw_forward(delta, gamma), delta);
            const Matrix gibbs = oracle::brute_force_expected_alignment(x, y, gamma);
            const Matrix quartic = oracle::average_alignment_forward(x, y, gamma);
            record(alignment, std::max({(e - gibbs).cwiseAbs().maxCoeff(), (e - quartic).cwiseAbs().maxCoeff(),
                                        (gibbs - quartic).cwiseAbs().maxCoeff()}));
            record(corners, std::max(std::abs(e(0, 0) - 1.0), std::abs(e(e.rows() - 1, e.cols() - 1) - 1.0)));
        }
    }

    void sandwich_pair(const TimeSeries& x, const TimeSeries& y) {
        const double hard = dtw(x, y);
        const double log_paths = std::log(static_cast<double>(
            oracle::delannoy(static_cast<std::uint64_t>(x.length() - 1), static_cast<std::uint64_t>(y.length() - 1))));
        double previous = hard;
        for (double g : {0.01, 0.1, 1.0}) {
            const double soft = sdtw_value(x, y, Gamma(g));
            const double violation =
                std::max({soft - hard, (hard - g * log_paths) - soft, soft - previous, 0.0});
            record(sandwich, violation);
            previous = soft;
        }
    }

    void gradient_pair(const TimeSeries& x, const TimeSeries& y) {
        for (double g : {0.1, 1.0}) {
            const Gamma gamma(g);
            const Matrix analytic = sdtw_value_and_grad(x, y, gamma).gradient;
            const Matrix numeric = oracle::numeric_gradient(
                [&](const Matrix& v) { return sdtw_value(TimeSeries(v), y, gamma); }, x.values());
            record(gradient_x, oracle::relative_error(analytic, numeric));
        }
    }
};

}  // namespace

std::vector<VerifyCheck> run_verification(const VerifyOptions& options) {
    Checks checks;
    auto rng = substream(options.seed, "verify");

    for (std::size_t k = 0; k < options.oracle_pairs; ++k) {
        const Eigen::Index dims = (rng() & 1u) ? 3 : 1;
        const auto x = random_series(rng, dims, draw(rng, 1, kOracleLength));
        const auto y = random_series(rng, dims, draw(rng, 1, kOracleLength));
        checks.oracle_pair(x, y);
        checks.sandwich_pair(x, y);
    }
    for (std::size_t k = 0; k < options.gradient_pairs; ++k) {
        const Eigen::Index dims = draw(rng, 1, 2);
        checks.gradient_pair(random_series(rng, dims, draw(rng, 1, 12)), random_series(rng, dims, draw(rng, 1, 12)));
    }
    for (std::size_t k = 0; k < std::max<std::size_t>(1, options.gradient_pairs / 10); ++k) {
        const Eigen::Index dims = draw(rng, 1, 2);
        const Eigen::Index n = draw(rng, 2, 12);
        std::vector<PredictionPair> batch;
        for (int b = 0; b < 3; ++b) batch.push_back(split_series(random_series(rng, dims, n), 0.6));
        const auto t = batch.front().input.length();
        auto params = init_mlp(dims, t, n - t, draw(rng, 1, 8), rng());
        params.b1 = Matrix(random_series(rng, 1, params.b1.size()).values()).transpose();
        for (auto mode : {LossMode::euclidean(), LossMode::soft_dtw(0.1), LossMode::soft_dtw(1.0)}) {
            const Matrix analytic = training_grad(params, batch, mode).flatten();
            const Matrix numeric = oracle::numeric_gradient(
                [&](const Matrix& theta) {
                    auto q = params;
                    q.assign(theta);
                    return training_loss(q, batch, mode);
                },
                Matrix(params.flatten()));
            record(checks.gradient_mlp, oracle::relative_error(analytic, numeric));
        }
    }

    for (const auto& x : options.fixtures)
        for (const auto& y : options.fixtures) {
            if (x.dims() != y.dims()) continue;
            if (x.length() <= kOracleLength && y.length() <= kOracleLength) checks.oracle_pair(x, y);
            if (x.length() <= 12 && y.length() <= 12) checks.sandwich_pair(x, y);
            checks.gradient_pair(x, y);
        }

    return {checks.value, checks.alignment, checks.corners, checks.gradient_x, checks.gradient_mlp, checks.sandwich};
}

}  // namespace softdtw
