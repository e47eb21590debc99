#pragma once

#include <functional>
#include <string>
#include <vector>

#include "softdtw/time_series.hpp"

namespace softdtw {

struct LbfgsOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-6;   // on ||g||_inf
    double relative_tolerance = 1e-9;   // on (f_prev - f) / max(|f_prev|, |f|)
    int history_size = 10;
    int max_backtracks = 50;
    double armijo = 1e-4;
};

enum class StopReason { gradient_tolerance, relative_decrease, max_iterations, line_search_failed };

const char* to_string(StopReason reason);

struct LbfgsResult {
    Vector x;
    double value = 0.0;
    // Objective at the starting point followed by every accepted iterate;
    // strictly decreasing.
    std::vector<double> trace;
    int iterations = 0;
    StopReason reason = StopReason::max_iterations;
};

// Returns f(x) and writes the gradient into grad (already sized).
using Objective = std::function<double(const Vector& x, Vector& grad)>;

// Limited-memory BFGS (two-loop recursion) with Armijo backtracking
// (step halving). The returned point is the last accepted iterate, which is
// also the best one seen.
LbfgsResult lbfgs_minimize(const Objective& objective, Vector x0, const LbfgsOptions& options = {});

}  // namespace softdtw
