#pragma once

#include <cstdint>
#include <vector>

#include "softdtw/soft_dtw.hpp"

namespace softdtw {

// Weighted family of series to average. Weights are normalized to sum to one
// on construction.
class BarycenterProblem {
public:
    BarycenterProblem(std::vector<TimeSeries> series, std::vector<double> weights,
                      Eigen::Index target_length);

    // Uniform weights 1/N.
    static BarycenterProblem uniform(std::vector<TimeSeries> series, Eigen::Index target_length);

    const std::vector<TimeSeries>& series() const { return series_; }
    const std::vector<double>& weights() const { return weights_; }
    Eigen::Index target_length() const { return target_length_; }
    Eigen::Index dims() const { return series_.front().dims(); }
    std::size_t size() const { return series_.size(); }

private:
    std::vector<TimeSeries> series_;
    std::vector<double> weights_;
    Eigen::Index target_length_;
};

struct OptimizerConfig {
    int max_iterations = 100;
    double gradient_tolerance = 1e-6;
    double relative_tolerance = 1e-9;
    int history_size = 10;
    std::uint64_t seed = 0;
    // Subgradient base step; <= 0 selects 0.1 * mean Frobenius norm of the series.
    double initial_step = 0.0;
    // Workers for the per-series terms (0 = hardware concurrency).
    unsigned threads = 1;
};

struct BarycenterResult {
    TimeSeries barycenter;
    // Objective of the starting point, then of every accepted iterate. For
    // the soft method the objective uses the optimization gamma; DBA and the
    // subgradient method track the gamma = 0 objective (the subgradient trace
    // holds the best value seen so far).
    std::vector<double> trace;
    int iterations = 0;
    bool diverged = false;
};

// sum_i (lambda_i / m_i) sdtw_gamma(x, y_i)
double barycenter_objective(const TimeSeries& x, const BarycenterProblem& problem, Gamma gamma,
                            unsigned threads = 1);

// Gradient of the objective above; a subgradient through optimal paths at gamma = 0.
Matrix barycenter_gradient(const TimeSeries& x, const BarycenterProblem& problem, Gamma gamma,
                           unsigned threads = 1);

ValueAndGradient barycenter_value_and_grad(const TimeSeries& x, const BarycenterProblem& problem,
                                           Gamma gamma, unsigned threads = 1);

// L-BFGS on the soft-DTW objective; gamma must be positive.
BarycenterResult soft_barycenter(const BarycenterProblem& problem, Gamma gamma,
                                 const TimeSeries& init, const OptimizerConfig& config = {});

// DTW barycenter averaging with the 1/m_i weighting of the objective.
BarycenterResult dba_barycenter(const BarycenterProblem& problem, const TimeSeries& init,
                                const OptimizerConfig& config = {});

// x <- x - step/sqrt(t) * g on the gamma = 0 objective; returns the best iterate.
BarycenterResult subgradient_barycenter(const BarycenterProblem& problem, const TimeSeries& init,
                                        const OptimizerConfig& config = {});

// Columnwise weighted mean. All series must have the target length.
TimeSeries init_euclidean_mean(const BarycenterProblem& problem);

// A member chosen uniformly at random, resampled to the target length.
TimeSeries init_random(const BarycenterProblem& problem, std::uint64_t seed);

// Linear interpolation onto `length` evenly spaced points spanning the series.
TimeSeries resample_linear(const TimeSeries& series, Eigen::Index length);

}  // namespace softdtw
