#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "softdtw/clustering.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace softdtw;
using softdtw::testing::planted_dataset;
using softdtw::testing::random_series;

namespace {

std::vector<std::size_t> as_partition(const std::vector<int>& labels) {
    return {labels.begin(), labels.end()};
}

bool non_increasing(const std::vector<double>& trace) {
    for (std::size_t k = 1; k < trace.size(); ++k)
        if (trace[k] > trace[k - 1]) return false;
    return true;
}

}  // namespace

TEST_CASE("kmeans_objective") {
    std::mt19937_64 rng(41);
    std::vector<TimeSeries> data;
    for (int i = 0; i < 5; ++i) data.push_back(random_series(rng, 1, 6));
    CHECK(kmeans_objective(data, data, Gamma{0.0}) == 0.0);

    // k = 1 reduces to N times the uniform-weight barycenter objective.
    const auto x = random_series(rng, 1, 6);
    const std::vector<TimeSeries> one{x};
    const double bary = barycenter_objective(x, BarycenterProblem::uniform(data, 6), Gamma{0.5});
    CHECK(kmeans_objective(one, data, Gamma{0.5}) == doctest::Approx(5.0 * bary).epsilon(1e-13));

    std::vector<TimeSeries> cents{random_series(rng, 1, 4), random_series(rng, 1, 7), random_series(rng, 1, 5)};
    std::vector<TimeSeries> ys;
    for (int i = 0; i < 8; ++i) ys.push_back(random_series(rng, 1, softdtw::testing::uniform_int(rng, 3, 8)));
    double manual = 0.0;
    for (const auto& y : ys) {
        double best = kInf;
        for (const auto& c : cents) best = std::min(best, sdtw_value(c, y, Gamma{0.2}));
        manual += best / static_cast<double>(y.length());
    }
    CHECK(kmeans_objective(cents, ys, Gamma{0.2}) == doctest::Approx(manual).epsilon(1e-13));
    CHECK(kmeans_objective(cents, ys, Gamma{0.2}, 3) == kmeans_objective(cents, ys, Gamma{0.2}, 1));

    CHECK_THROWS_AS(kmeans_objective(cents, std::vector<TimeSeries>{}, Gamma{0.2}), std::domain_error);
}

TEST_CASE("assign_step") {
    std::mt19937_64 rng(42);
    std::vector<TimeSeries> data;
    for (int i = 0; i < 10; ++i) data.push_back(random_series(rng, 2, softdtw::testing::uniform_int(rng, 4, 9)));

    const std::vector<TimeSeries> cents{data[3], data[7]};
    const auto a = assign_step(cents, data, Gamma{0.0});
    CHECK(a[3] == 0);
    CHECK(a[7] == 1);

    const std::vector<TimeSeries> single{data[0]};
    for (auto v : assign_step(single, data, Gamma{1.0})) CHECK(v == 0);

    const std::vector<TimeSeries> three{data[1], data[2], random_series(rng, 2, 6)};
    const auto got = assign_step(three, data, Gamma{0.3});
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < three.size(); ++j)
            if (sdtw_value(three[j], data[i], Gamma{0.3}) < sdtw_value(three[best], data[i], Gamma{0.3}))
                best = j;
        CHECK(got[i] == best);
    }
    // Idempotent without a centering step.
    CHECK(assign_step(three, data, Gamma{0.3}) == got);

    // Duplicate centroids tie; the lower index wins.
    const std::vector<TimeSeries> dup{data[5], data[5]};
    for (auto v : assign_step(dup, data, Gamma{0.1})) CHECK(v == 0);
}

TEST_CASE("assignments are invariant to global scaling at gamma = 0") {
    std::mt19937_64 rng(43);
    std::vector<TimeSeries> data, scaled;
    for (int i = 0; i < 12; ++i) {
        data.push_back(random_series(rng, 1, 7));
        scaled.emplace_back(Matrix(3.5 * data.back().values()));
    }
    const std::vector<TimeSeries> cents{data[0], data[4], data[9]};
    const std::vector<TimeSeries> scaled_cents{scaled[0], scaled[4], scaled[9]};
    CHECK(assign_step(cents, data, Gamma{0.0}) == assign_step(scaled_cents, scaled, Gamma{0.0}));
}

TEST_CASE("center_step") {
    const TimeSeries y{0.0, 2.0, -1.0, 1.0};
    const std::vector<TimeSeries> data{y};
    const std::vector<std::size_t> assign{0};
    KMeansConfig cfg;
    cfg.method = CenterMethod::dba;
    CHECK(center_step(data, assign, data, Gamma{0.0}, cfg)[0] == y);

    std::mt19937_64 rng(44);
    const auto dataset = planted_dataset(rng, 2, 6, 25);
    std::vector<std::size_t> labels(dataset.labels.begin(), dataset.labels.end());
    std::vector<TimeSeries> prev{random_series(rng, 1, 25), random_series(rng, 1, 25)};
    for (auto method : {CenterMethod::soft, CenterMethod::dba, CenterMethod::subgradient}) {
        cfg.method = method;
        const Gamma g{method == CenterMethod::soft ? 0.5 : 0.0};
        const auto next = center_step(dataset.series, labels, prev, g, cfg);
        for (std::size_t j = 0; j < 2; ++j) {
            std::vector<TimeSeries> members;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == j) members.push_back(dataset.series[i]);
            auto cost = [&](const TimeSeries& c) {
                double s = 0;
                for (const auto& m : members) s += sdtw_value(c, m, g) / static_cast<double>(m.length());
                return s;
            };
            CHECK(cost(next[j]) <= cost(prev[j]));
        }
    }

    // Empty clusters keep their centroid.
    const std::vector<TimeSeries> two{random_series(rng, 1, 4), random_series(rng, 1, 4)};
    const std::vector<std::size_t> all_first{0};
    cfg.method = CenterMethod::soft;
    CHECK(center_step(data, all_first, two, Gamma{1.0}, cfg)[1] == two[1]);
}

TEST_CASE("lloyd_kmeans") {
    std::mt19937_64 rng(45);
    const auto dataset = planted_dataset(rng, 3, 5, 30);

    SUBCASE("k = N starting from the data") {
        KMeansConfig cfg;
        cfg.method = CenterMethod::dba;
        const auto res = lloyd_kmeans(dataset.series, dataset.size(), Gamma{0.0}, cfg);
        CHECK(res.converged);
        CHECK(res.iterations == 1);
        CHECK(res.objective_trace.back() == 0.0);
    }
    SUBCASE("k = 1 is one barycenter run") {
        KMeansConfig cfg;
        const auto res = lloyd_kmeans(dataset.series, 1, Gamma{1.0}, cfg);
        for (auto a : res.assignments) CHECK(a == 0);
        const auto init = initial_centroids(dataset.series, 1, 30, cfg.init, cfg.seed);
        const auto bary = soft_barycenter(BarycenterProblem::uniform(dataset.series, 30), Gamma{1.0}, init[0], cfg.inner);
        CHECK((res.centroids[0].values() - bary.barycenter.values()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("planted clusters are recovered") {
        KMeansConfig cfg;
        cfg.init = InitMode::euclidean;
        cfg.seed = 3;
        const auto res = lloyd_kmeans(dataset.series, 3, Gamma{1.0}, cfg);
        CHECK(adjusted_rand_index(res.assignments, as_partition(dataset.labels)) == 1.0);
        CHECK(non_increasing(res.objective_trace));
    }
    SUBCASE("deterministic for a seed") {
        KMeansConfig cfg;
        cfg.seed = 9;
        const auto a = lloyd_kmeans(dataset.series, 3, Gamma{0.5}, cfg);
        const auto b = lloyd_kmeans(dataset.series, 3, Gamma{0.5}, cfg);
        CHECK(a.assignments == b.assignments);
        CHECK(a.objective_trace == b.objective_trace);
        for (std::size_t j = 0; j < 3; ++j) CHECK(a.centroids[j] == b.centroids[j]);
    }
    SUBCASE("trace never increases, for every method") {
        for (auto method : {CenterMethod::soft, CenterMethod::dba, CenterMethod::subgradient}) {
            KMeansConfig cfg;
            cfg.method = method;
            cfg.outer_iterations = 5;
            cfg.inner.max_iterations = 20;
            const Gamma g{method == CenterMethod::soft ? 0.1 : 0.0};
            CHECK(non_increasing(lloyd_kmeans(dataset.series, 4, g, cfg).objective_trace));
        }
    }
    CHECK_THROWS_AS(lloyd_kmeans(dataset.series, dataset.size() + 1, Gamma{1.0}), std::domain_error);
}

TEST_CASE("adjusted_rand_index") {
    const std::vector<std::size_t> a{0, 0, 1, 1, 2, 2};
    const std::vector<std::size_t> relabeled{2, 2, 0, 0, 1, 1};
    CHECK(adjusted_rand_index(a, relabeled) == doctest::Approx(1.0));
    const std::vector<std::size_t> b{0, 1, 0, 1, 0, 1};
    CHECK(adjusted_rand_index(a, b) < 0.1);
    // Contingency [[2,1,0],[0,1,2]].
    const std::vector<std::size_t> x{0, 0, 0, 1, 1, 1};
    const std::vector<std::size_t> y{0, 0, 1, 1, 2, 2};
    // sum C(n_ij,2) = 1 + 1 = 2; rows 3+3 = 6; cols 1+1+1 = 3; expected 6*3/15 = 1.2; max 4.5.
    CHECK(adjusted_rand_index(x, y) == doctest::Approx((2 - 1.2) / (4.5 - 1.2)));
}

TEST_CASE("nearest-centroid classifier") {
    SUBCASE("identical copies per class") {
        Dataset d;
        const TimeSeries a{0, 1, 0, -1};
        const TimeSeries b{2, 2, -2, -2};
        for (int i = 0; i < 3; ++i) {
            d.series.push_back(a);
            d.labels.push_back(4);
            d.series.push_back(b);
            d.labels.push_back(7);
        }
        const auto model = nearest_centroid_fit(d, Gamma{0.01});
        REQUIRE(model.labels == std::vector<int>{4, 7});
        CHECK((model.centroids[0].values() - a.values()).cwiseAbs().maxCoeff() < 1e-4);
        CHECK((model.centroids[1].values() - b.values()).cwiseAbs().maxCoeff() < 1e-4);
        CHECK(nearest_centroid_predict(model, a) == 4);
        CHECK(nearest_centroid_predict(model, b) == 7);
    }
    SUBCASE("one series per class stays put") {
        Dataset d;
        d.series = {TimeSeries{0.0, 3.0, 0.0, -2.0, 1.0}, TimeSeries{1.0, -1.0, 2.5, 0.0, -3.0}};
        d.labels = {0, 1};
        const auto model = nearest_centroid_fit(d, Gamma{0.001});
        for (int c = 0; c < 2; ++c)
            CHECK(dtw(model.centroids[static_cast<std::size_t>(c)], d.series[static_cast<std::size_t>(c)]) < 1e-6);
    }
    SUBCASE("hard model, exact centroid") {
        CentroidModel model;
        model.labels = {1, 2};
        model.centroids = {TimeSeries{0, 0, 5}, TimeSeries{3, 3, 3}};
        model.gamma = Gamma{0.0};
        CHECK(nearest_centroid_predict(model, TimeSeries{3, 3, 3}) == 2);
        CHECK(nearest_centroid_predict(model, TimeSeries{0, 0, 5}) == 1);

        CentroidModel single;
        single.labels = {9};
        single.centroids = {TimeSeries{1}};
        CHECK(nearest_centroid_predict(single, TimeSeries{-100, 100}) == 9);

        CentroidModel tie;
        tie.labels = {0, 1};
        tie.centroids = {TimeSeries{1, 1}, TimeSeries{1, 1}};
        CHECK(nearest_centroid_predict(tie, TimeSeries{0, 4}) == 0);
    }
    SUBCASE("planted classes") {
        std::mt19937_64 rng(46);
        const auto train = planted_dataset(rng, 3, 6, 30, 0.05);
        const auto model = nearest_centroid_fit(train, Gamma{1.0});
        CHECK(classification_accuracy(model, train) == 1.0);

        const auto test = planted_dataset(rng, 3, 4, 30, 0.05);
        for (std::size_t i = 0; i < test.size(); ++i) {
            int best = 0;
            double best_score = kInf;
            for (std::size_t c = 0; c < 3; ++c) {
                const double s = sdtw_value(model.centroids[c], test.series[i], Gamma{1.0}) / 30.0;
                if (s < best_score) {
                    best_score = s;
                    best = model.labels[c];
                }
            }
            CHECK(nearest_centroid_predict(model, test.series[i]) == best);
        }
    }
    CHECK_THROWS_AS(nearest_centroid_fit(Dataset{}, Gamma{1.0}), std::domain_error);
}

TEST_CASE("select_gamma") {
    std::mt19937_64 rng(47);
    const auto train = planted_dataset(rng, 2, 4, 20, 0.05);
    const auto val = planted_dataset(rng, 2, 3, 20, 0.05);
    OptimizerConfig cfg;
    cfg.max_iterations = 30;

    const std::vector<double> one{0.3};
    CHECK(select_gamma(train, val, one, cfg).gamma.value() == 0.3);

    // Well-separated classes: every candidate is perfect, so the smallest wins.
    const std::vector<double> several{1.0, 0.1, 3.0};
    const auto sel = select_gamma(train, val, several, cfg);
    CHECK(sel.validation_accuracy == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(sel.gamma.value() == 0.1);

    const auto grid = log_spaced(1e-3, 10.0, 15);
    REQUIRE(grid.size() == 15);
    CHECK(grid.front() == 1e-3);
    CHECK(grid.back() == 10.0);
    CHECK(grid[7] == doctest::Approx(0.1).epsilon(1e-12));
    for (std::size_t k = 1; k < grid.size(); ++k)
        CHECK(grid[k] / grid[k - 1] == doctest::Approx(std::pow(1e4, 1.0 / 14.0)).epsilon(1e-12));
}
