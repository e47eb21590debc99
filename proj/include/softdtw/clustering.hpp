#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "softdtw/barycenter.hpp"
#include "softdtw/dataset.hpp"

namespace softdtw {

enum class CenterMethod { soft, dba, subgradient };
enum class InitMode { random, euclidean };

struct KMeansConfig {
    int outer_iterations = 30;
    OptimizerConfig inner;  // inner.max_iterations = 100 by default
    CenterMethod method = CenterMethod::soft;
    InitMode init = InitMode::random;
    std::uint64_t seed = 0;
    // Centroid length; 0 selects the median series length.
    Eigen::Index centroid_length = 0;
    unsigned threads = 1;
};

struct ClusteringResult {
    std::vector<TimeSeries> centroids;
    std::vector<std::size_t> assignments;
    // k-means energy of the initial centroids, then after every outer iteration.
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;  // assignments reached a fixpoint
};

// sum_i (1 / m_i) min_j sdtw_gamma(x_j, y_i)
double kmeans_objective(std::span<const TimeSeries> centroids, std::span<const TimeSeries> data,
                        Gamma gamma, unsigned threads = 1);

// Index of the closest centroid for every series; ties go to the lowest index.
std::vector<std::size_t> assign_step(std::span<const TimeSeries> centroids,
                                     std::span<const TimeSeries> data, Gamma gamma,
                                     unsigned threads = 1);

// Recomputes each centroid from its members, seeded with the previous
// centroid. A new centroid is kept only if it does not increase its cluster's
// share of the k-means energy. Clusters without members keep their centroid.
std::vector<TimeSeries> center_step(std::span<const TimeSeries> data,
                                    std::span<const std::size_t> assignments,
                                    std::span<const TimeSeries> centroids, Gamma gamma,
                                    const KMeansConfig& config);

std::vector<TimeSeries> initial_centroids(std::span<const TimeSeries> data, std::size_t k,
                                          Eigen::Index length, InitMode mode, std::uint64_t seed);

ClusteringResult lloyd_kmeans(std::span<const TimeSeries> data, std::size_t k, Gamma gamma,
                              const KMeansConfig& config = {});

Eigen::Index median_length(std::span<const TimeSeries> data);

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Nearest-centroid classifier: one barycenter per class.
struct CentroidModel {
    std::vector<int> labels;  // sorted
    std::vector<TimeSeries> centroids;
    Gamma gamma;
};

// gamma > 0 fits soft barycenters; gamma = 0 falls back to DBA.
CentroidModel nearest_centroid_fit(const Dataset& train, Gamma gamma,
                                   const OptimizerConfig& config = {});

// argmin_c sdtw_gamma(centroid_c, x) / length(centroid_c); ties go to the lower label.
int nearest_centroid_predict(const CentroidModel& model, const TimeSeries& x);

double classification_accuracy(const CentroidModel& model, const Dataset& data);

struct GammaSelection {
    Gamma gamma;
    std::vector<double> validation_accuracy;  // one per candidate, in input order
};

// Candidate with the best validation accuracy; ties go to the smaller gamma.
GammaSelection select_gamma(const Dataset& train, const Dataset& validation,
                            std::span<const double> candidates, const OptimizerConfig& config = {});

// `count` points evenly spaced in log scale over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

}  // namespace softdtw
