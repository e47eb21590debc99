#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "softdtw/time_series.hpp"

namespace softdtw {

struct VerifyCheck {
    std::string name;
    std::size_t cases = 0;
    double worst = 0.0;  // largest error observed
    double tolerance = 0.0;
    bool passed() const { return worst <= tolerance; }
};

struct VerifyOptions {
    std::uint64_t seed = 0;
    std::size_t oracle_pairs = 200;  // random pairs for the exhaustive checks
    std::size_t gradient_pairs = 50;  // random pairs for finite differences
    // Extra series (e.g. from a fixture file); every ordered pair is checked.
    std::vector<TimeSeries> fixtures;
};

// Cross-checks the dynamic programs against the exhaustive oracles and
// finite differences:
//   value       forward recursion vs. enumeration over all alignments
//   alignment   backward pass vs. Gibbs expectation vs. quartic recursion
//   corners     e(1,1) = e(n,m) = 1
//   gradient_x  analytic vs. central differences in x
//   gradient_mlp  network parameter gradients vs. central differences
//   sandwich    dtw - gamma log D <= sdtw <= dtw
std::vector<VerifyCheck> run_verification(const VerifyOptions& options);

}  // namespace softdtw
