#pragma once

// Exhaustive reference computations. Exponential or quartic cost; meant for
// tests and the `verify` command only.

#include <cstdint>
#include <functional>
#include <vector>

#include "softdtw/soft_dtw.hpp"

namespace softdtw::oracle {

// Largest alignment set the enumerators accept.
inline constexpr std::uint64_t kMaxAlignments = 1'000'000;
// Largest n * m accepted by average_alignment_forward.
inline constexpr Eigen::Index kMaxForwardCells = 400;

// D(a,0) = D(0,b) = 1, D(a,b) = D(a-1,b) + D(a,b-1) + D(a-1,b-1).
// Throws std::overflow_error if the count does not fit in 64 bits.
std::uint64_t delannoy(std::uint64_t a, std::uint64_t b);

// Every monotone path from (0,0) to (n-1,m-1), ordered lexicographically by
// step sequence with diagonal < down < right.
std::vector<AlignmentPath> enumerate_paths(Eigen::Index n, Eigen::Index m);

// Same set as binary n x m matrices.
std::vector<Matrix> enumerate_alignments(Eigen::Index n, Eigen::Index m);

double brute_force_sdtw(const TimeSeries& x, const TimeSeries& y, Gamma gamma);

// Gibbs-weighted mean of all alignment matrices; gamma > 0.
Matrix brute_force_expected_alignment(const TimeSeries& x, const TimeSeries& y, Gamma gamma);

// Quartic forward recursion accumulating the average path matrix of every
// prefix problem; gamma > 0.
Matrix average_alignment_forward(const TimeSeries& x, const TimeSeries& y, Gamma gamma);

// Central differences of f around x, one coordinate at a time.
Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double step = 1e-5);

// ||a - b||_F / max(||a||_F, ||b||_F); zero when both are zero.
double relative_error(const Matrix& a, const Matrix& b);
double relative_error(double a, double b);

}  // namespace softdtw::oracle
