#include "softdtw/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "softdtw/parallel.hpp"
#include "softdtw/random.hpp"

namespace softdtw {

namespace {

// k x N matrix of sdtw_gamma(centroid_j, series_i).
Matrix distance_matrix(std::span<const TimeSeries> centroids, std::span<const TimeSeries> data,
                       Gamma gamma, unsigned threads) {
    Matrix d(static_cast<Eigen::Index>(centroids.size()), static_cast<Eigen::Index>(data.size()));
    parallel_for(data.size(), threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < centroids.size(); ++j)
            d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                sdtw_value(centroids[j], data[i], gamma);
    });
    return d;
}

std::vector<std::size_t> argmin_columns(const Matrix& d) {
    std::vector<std::size_t> out(static_cast<std::size_t>(d.cols()));
    for (Eigen::Index i = 0; i < d.cols(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < d.rows(); ++j)
            if (d(j, i) < d(best, i)) best = j;
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return out;
}

double energy(const Matrix& d, std::span<const TimeSeries> data) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < d.cols(); ++i)
        total += d.col(i).minCoeff() / static_cast<double>(data[static_cast<std::size_t>(i)].length());
    return total;
}

double cluster_cost(const TimeSeries& centroid, std::span<const TimeSeries> members, Gamma gamma) {
    double total = 0.0;
    for (const auto& y : members) total += sdtw_value(centroid, y, gamma) / static_cast<double>(y.length());
    return total;
}

bool equal_lengths(std::span<const TimeSeries> data, Eigen::Index length) {
    return std::all_of(data.begin(), data.end(),
                       [&](const TimeSeries& s) { return s.length() == length; });
}

std::vector<TimeSeries> euclidean_kmeans_means(std::span<const TimeSeries> data, std::size_t k,
                                               std::mt19937_64& rng) {
    const auto n = data.size();
    std::vector<Vector> points;
    for (const auto& s : data) points.emplace_back(Eigen::Map<const Vector>(s.values().data(), s.values().size()));

    // k-means++ seeding.
    std::vector<Vector> centers;
    centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (centers.size() < k) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, (points[i] - c).squaredNorm());
            d2[i] = best;
        }
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            pick = std::discrete_distribution<std::size_t>(d2.begin(), d2.end())(rng);
        } else {
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        }
        centers.push_back(points[pick]);
    }

    std::vector<std::size_t> assign(n, k);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < k; ++j)
                if ((points[i] - centers[j]).squaredNorm() < (points[i] - centers[best]).squaredNorm()) best = j;
            if (best != assign[i]) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        for (std::size_t j = 0; j < k; ++j) {
            Vector sum = Vector::Zero(points[0].size());
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (assign[i] == j) {
                    sum += points[i];
                    ++count;
                }
            if (count > 0) centers[j] = sum / static_cast<double>(count);
        }
    }

    std::vector<TimeSeries> out;
    const auto p = data.front().dims();
    const auto len = data.front().length();
    for (const auto& c : centers) out.emplace_back(Matrix(Eigen::Map<const Matrix>(c.data(), p, len)));
    return out;
}

BarycenterResult run_center(const BarycenterProblem& problem, Gamma gamma, const TimeSeries& init,
                            CenterMethod method, const OptimizerConfig& config) {
    switch (method) {
        case CenterMethod::soft: return soft_barycenter(problem, gamma, init, config);
        case CenterMethod::dba: return dba_barycenter(problem, init, config);
        case CenterMethod::subgradient: return subgradient_barycenter(problem, init, config);
    }
    throw std::logic_error("unknown centering method");
}

}  // namespace

double kmeans_objective(std::span<const TimeSeries> centroids, std::span<const TimeSeries> data,
                        Gamma gamma, unsigned threads) {
    if (data.empty()) throw std::domain_error("k-means objective of an empty dataset");
    if (centroids.empty()) throw std::domain_error("k-means objective needs a centroid");
    return energy(distance_matrix(centroids, data, gamma, threads), data);
}

std::vector<std::size_t> assign_step(std::span<const TimeSeries> centroids,
                                     std::span<const TimeSeries> data, Gamma gamma,
                                     unsigned threads) {
    if (centroids.empty()) throw std::domain_error("assignment needs at least one centroid");
    return argmin_columns(distance_matrix(centroids, data, gamma, threads));
}

std::vector<TimeSeries> center_step(std::span<const TimeSeries> data,
                                    std::span<const std::size_t> assignments,
                                    std::span<const TimeSeries> centroids, Gamma gamma,
                                    const KMeansConfig& config) {
    if (assignments.size() != data.size())
        throw std::domain_error("one assignment per series is required");
    if (config.method == CenterMethod::soft && gamma.hard())
        throw std::invalid_argument("soft centering needs gamma > 0");

    std::vector<TimeSeries> out(centroids.begin(), centroids.end());
    std::vector<std::vector<TimeSeries>> members(centroids.size());
    for (std::size_t i = 0; i < data.size(); ++i) members.at(assignments[i]).push_back(data[i]);

    parallel_for(centroids.size(), config.threads, [&](std::size_t j) {
        if (members[j].empty()) return;
        const auto problem = BarycenterProblem::uniform(members[j], centroids[j].length());
        const auto res = run_center(problem, gamma, centroids[j], config.method, config.inner);
        if (cluster_cost(res.barycenter, members[j], gamma) <= cluster_cost(centroids[j], members[j], gamma))
            out[j] = res.barycenter;
    });
    return out;
}

Eigen::Index median_length(std::span<const TimeSeries> data) {
    if (data.empty()) throw std::domain_error("median length of an empty dataset");
    std::vector<Eigen::Index> lengths;
    for (const auto& s : data) lengths.push_back(s.length());
    std::sort(lengths.begin(), lengths.end());
    return lengths[(lengths.size() - 1) / 2];
}

std::vector<TimeSeries> initial_centroids(std::span<const TimeSeries> data, std::size_t k,
                                          Eigen::Index length, InitMode mode, std::uint64_t seed) {
    if (k < 1 || k > data.size()) throw std::domain_error("k must be between 1 and the number of series");
    auto rng = substream(seed, "kmeans-init");
    if (mode == InitMode::euclidean && equal_lengths(data, length))
        return euclidean_kmeans_means(data, k, rng);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<TimeSeries> out;
    for (std::size_t j = 0; j < k; ++j) out.push_back(resample_linear(data[order[j]], length));
    return out;
}

ClusteringResult lloyd_kmeans(std::span<const TimeSeries> data, std::size_t k, Gamma gamma,
                              const KMeansConfig& config) {
    if (data.empty()) throw std::domain_error("k-means on an empty dataset");
    if (k < 1 || k > data.size()) throw std::domain_error("k must be between 1 and the number of series");
    const Eigen::Index length = config.centroid_length > 0 ? config.centroid_length : median_length(data);

    ClusteringResult out;
    out.centroids = initial_centroids(data, k, length, config.init, config.seed);
    Matrix d = distance_matrix(out.centroids, data, gamma, config.threads);
    out.assignments = argmin_columns(d);
    out.objective_trace.push_back(energy(d, data));

    while (out.iterations < config.outer_iterations) {
        // Move unused centroids onto the worst-served series of clusters that
        // can spare one, then reassign.
        std::vector<std::size_t> sizes(k, 0);
        for (auto a : out.assignments) ++sizes[a];
        bool reseeded = false;
        std::vector<bool> taken(data.size(), false);
        for (std::size_t j = 0; j < k; ++j) {
            if (sizes[j] > 0) continue;
            std::size_t worst = data.size();
            for (std::size_t i = 0; i < data.size(); ++i) {
                const auto a = out.assignments[i];
                if (taken[i] || sizes[a] < 2) continue;
                const double di = d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
                if (worst == data.size() ||
                    di > d(static_cast<Eigen::Index>(out.assignments[worst]), static_cast<Eigen::Index>(worst)))
                    worst = i;
            }
            if (worst == data.size()) continue;
            taken[worst] = true;
            --sizes[out.assignments[worst]];
            out.centroids[j] = resample_linear(data[worst], length);
            reseeded = true;
        }
        if (reseeded) {
            d = distance_matrix(out.centroids, data, gamma, config.threads);
            out.assignments = argmin_columns(d);
        }

        out.centroids = center_step(data, out.assignments, out.centroids, gamma, config);
        d = distance_matrix(out.centroids, data, gamma, config.threads);
        auto next = argmin_columns(d);
        out.objective_trace.push_back(energy(d, data));
        ++out.iterations;
        const bool same = next == out.assignments;
        out.assignments = std::move(next);
        if (same) {
            out.converged = true;
            break;
        }
    }
    return out;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw std::domain_error("partitions must have the same size");
    const auto n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<std::size_t, std::size_t>, double> table;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto pairs = [](double c) { return c * (c - 1) / 2; };
    double index = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [key, c] : table) index += pairs(c);
    for (const auto& [key, c] : rows) sum_rows += pairs(c);
    for (const auto& [key, c] : cols) sum_cols += pairs(c);
    const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

CentroidModel nearest_centroid_fit(const Dataset& train, Gamma gamma, const OptimizerConfig& config) {
    if (!train.labeled()) throw std::domain_error("nearest-centroid training needs labels");
    train.validate();
    CentroidModel model;
    model.gamma = gamma;
    model.labels = train.classes();
    for (std::size_t c = 0; c < model.labels.size(); ++c) {
        std::vector<TimeSeries> members;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train.labels[i] == model.labels[c]) members.push_back(train.series[i]);
        if (members.empty()) throw std::domain_error("empty class");
        const Eigen::Index length = median_length(members);
        const auto problem = BarycenterProblem::uniform(members, length);
        const TimeSeries init = equal_lengths(members, length)
                                    ? init_euclidean_mean(problem)
                                    : init_random(problem, config.seed + c);
        model.centroids.push_back(gamma.hard() ? dba_barycenter(problem, init, config).barycenter
                                               : soft_barycenter(problem, gamma, init, config).barycenter);
    }
    return model;
}

int nearest_centroid_predict(const CentroidModel& model, const TimeSeries& x) {
    if (model.centroids.empty()) throw std::logic_error("nearest-centroid model is not fitted");
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.centroids.size(); ++c) {
        const auto& centroid = model.centroids[c];
        const double score = sdtw_value(centroid, x, model.gamma) / static_cast<double>(centroid.length());
        if (score < best_score) {
            best_score = score;
            best = c;
        }
    }
    return model.labels[best];
}

double classification_accuracy(const CentroidModel& model, const Dataset& data) {
    if (!data.labeled() || data.size() == 0) throw std::domain_error("accuracy needs labeled data");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        hits += nearest_centroid_predict(model, data.series[i]) == data.labels[i];
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

GammaSelection select_gamma(const Dataset& train, const Dataset& validation,
                            std::span<const double> candidates, const OptimizerConfig& config) {
    if (candidates.empty()) throw std::domain_error("no gamma candidates");
    if (validation.size() == 0) throw std::domain_error("empty validation set");
    GammaSelection out;
    double best_acc = -1.0;
    for (double g : candidates) {
        const auto model = nearest_centroid_fit(train, Gamma{g}, config);
        const double acc = classification_accuracy(model, validation);
        out.validation_accuracy.push_back(acc);
        if (acc > best_acc || (acc == best_acc && g < out.gamma.value())) {
            best_acc = acc;
            out.gamma = Gamma{g};
        }
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw std::domain_error("invalid log-spaced range");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

}  // namespace softdtw
