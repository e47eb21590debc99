#include "softdtw/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace softdtw {

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::gradient_tolerance: return "gradient_tolerance";
        case StopReason::relative_decrease: return "relative_decrease";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::line_search_failed: return "line_search_failed";
    }
    return "unknown";
}

namespace {

struct Correction {
    Vector s;
    Vector y;
    double rho;
};

Vector two_loop(const Vector& g, const std::deque<Correction>& history) {
    Vector q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
        alpha[k] = history[k].rho * history[k].s.dot(q);
        q -= alpha[k] * history[k].y;
    }
    const auto& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t k = 0; k < history.size(); ++k) {
        const double beta = history[k].rho * history[k].y.dot(q);
        q += (alpha[k] - beta) * history[k].s;
    }
    return -q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, Vector x0, const LbfgsOptions& options) {
    if (options.max_iterations < 1 || options.history_size < 1)
        throw std::invalid_argument("lbfgs: max_iterations and history_size must be positive");

    LbfgsResult out;
    out.x = std::move(x0);
    Vector g(out.x.size());
    out.value = objective(out.x, g);
    if (!std::isfinite(out.value) || !g.allFinite())
        throw std::domain_error("lbfgs: objective is not finite at the starting point");
    out.trace.push_back(out.value);

    std::deque<Correction> history;
    Vector x_new(out.x.size());
    Vector g_new(out.x.size());

    while (out.iterations < options.max_iterations) {
        if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
            out.reason = StopReason::gradient_tolerance;
            return out;
        }

        bool accepted = false;
        double f_new = 0.0;
        // First try the quasi-Newton direction, then steepest descent with
        // a cleared memory.
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Vector d;
            double step = 1.0;
            if (history.empty()) {
                d = -g;
                step = std::min(1.0, 1.0 / g.norm());
            } else {
                d = two_loop(g, history);
            }
            double slope = g.dot(d);
            if (!(slope < 0.0)) {
                history.clear();
                d = -g;
                step = std::min(1.0, 1.0 / g.norm());
                slope = g.dot(d);
            }
            for (int k = 0; k < options.max_backtracks; ++k, step *= 0.5) {
                x_new = out.x + step * d;
                f_new = objective(x_new, g_new);
                if (std::isfinite(f_new) && g_new.allFinite() &&
                    f_new <= out.value + options.armijo * step * slope && f_new < out.value) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (history.empty()) break;
                history.clear();
            }
        }
        if (!accepted) {
            out.reason = StopReason::line_search_failed;
            return out;
        }

        Correction c{x_new - out.x, g_new - g, 0.0};
        const double sy = c.s.dot(c.y);
        if (sy > 1e-12 * c.y.squaredNorm() && sy > 0.0) {
            c.rho = 1.0 / sy;
            history.push_back(std::move(c));
            if (static_cast<int>(history.size()) > options.history_size) history.pop_front();
        }

        const double f_old = out.value;
        out.x = x_new;
        g = g_new;
        out.value = f_new;
        out.trace.push_back(f_new);
        ++out.iterations;

        if (f_old - f_new <= options.relative_tolerance * std::max(std::abs(f_old), std::abs(f_new))) {
            out.reason = StopReason::relative_decrease;
            return out;
        }
    }
    out.reason = StopReason::max_iterations;
    return out;
}

}  // namespace softdtw
