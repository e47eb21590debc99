#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "softdtw/oracle.hpp"
#include "test_support.hpp"

using namespace softdtw;
using namespace softdtw::oracle;
using softdtw::testing::random_series;
using softdtw::testing::uniform_int;

namespace {

bool is_alignment_matrix(const Matrix& a) {
    const auto n = a.rows();
    const auto m = a.cols();
    if ((a.array() != 0.0 && a.array() != 1.0).any()) return false;
    // Along a monotone path, path order is row-major order of its cells.
    std::vector<Cell> cells;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            if (a(i, j) == 1.0) cells.push_back({i, j});
    return AlignmentPath{cells}.valid(n, m);
}

}  // namespace

TEST_CASE("delannoy numbers") {
    CHECK(delannoy(1, 1) == 3);
    CHECK(delannoy(0, 7) == 1);
    CHECK(delannoy(7, 0) == 1);
    CHECK(delannoy(3, 5) == 231);
    CHECK(delannoy(5, 3) == 231);
    CHECK(delannoy(2, 2) == 13);
    CHECK(delannoy(10, 10) == 8097453);
    CHECK_THROWS_AS(delannoy(200, 200), std::overflow_error);
}

TEST_CASE("enumerate_alignments") {
    const auto one = enumerate_alignments(1, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0](0, 0) == 1.0);

    const auto two = enumerate_alignments(2, 2);
    REQUIRE(two.size() == 3);
    // Lexicographic step order: diagonal, down-then-right, right-then-down.
    Matrix diag(2, 2), down(2, 2), right(2, 2);
    diag << 1, 0, 0, 1;
    down << 1, 0, 1, 1;
    right << 1, 1, 0, 1;
    CHECK(two[0] == diag);
    CHECK(two[1] == down);
    CHECK(two[2] == right);

    CHECK(enumerate_alignments(4, 6).size() == 231);

    for (Eigen::Index n = 1; n <= 7; ++n) {
        for (Eigen::Index m = 1; m <= 7; ++m) {
            const auto all = enumerate_alignments(n, m);
            CHECK(all.size() == delannoy(static_cast<std::uint64_t>(n - 1),
                                         static_cast<std::uint64_t>(m - 1)));
            std::set<std::vector<double>> distinct;
            for (const auto& a : all) {
                CHECK(is_alignment_matrix(a));
                distinct.insert(std::vector<double>(a.data(), a.data() + a.size()));
            }
            CHECK(distinct.size() == all.size());
        }
    }

    CHECK_THROWS_AS(enumerate_alignments(12, 12), std::length_error);
}

TEST_CASE("brute_force_sdtw") {
    for (double g : {0.0, 0.5, 3.0})
        CHECK(brute_force_sdtw(TimeSeries{0}, TimeSeries{1}, Gamma{g}) == 1.0);
    CHECK(brute_force_sdtw(TimeSeries{0, 0}, TimeSeries{0, 0}, Gamma{1.0}) ==
          doctest::Approx(-std::log(3.0)).epsilon(1e-15));

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_series(rng, 1, 3);
        const auto y = random_series(rng, 1, 4);
        CHECK(relative_error(brute_force_sdtw(x, y, Gamma{0.2}), sdtw_value(x, y, Gamma{0.2})) <
              1e-10);

        // gamma = 0 is exactly the cheapest enumerated path.
        const auto delta = cost_matrix(x, y);
        double best = kInf;
        for (const auto& p : enumerate_paths(3, 4)) best = std::min(best, p.cost(delta));
        CHECK(brute_force_sdtw(x, y, Gamma{0.0}) == best);
    }
}

TEST_CASE("brute_force_expected_alignment") {
    CHECK(brute_force_expected_alignment(TimeSeries{3}, TimeSeries{-1}, Gamma{0.7})(0, 0) == 1.0);

    Matrix expected(2, 2);
    expected << 1, 1.0 / 3, 1.0 / 3, 1;
    for (double g : {0.01, 1.0, 100.0}) {
        const auto e = brute_force_expected_alignment(TimeSeries{0, 0}, TimeSeries{0, 0}, Gamma{g});
        CHECK((e - expected).cwiseAbs().maxCoeff() < 1e-15);
    }

    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_series(rng, 1, 4);
        const auto y = random_series(rng, 1, 4);
        const auto e = sdtw_backward(sdtw_forward(x, y, Gamma{0.5}), cost_matrix(x, y));
        CHECK((brute_force_expected_alignment(x, y, Gamma{0.5}) - e).cwiseAbs().maxCoeff() < 1e-8);
    }
    CHECK_THROWS_AS(brute_force_expected_alignment(TimeSeries{0}, TimeSeries{0}, Gamma{0.0}),
                    std::invalid_argument);
}

TEST_CASE("average_alignment_forward") {
    CHECK(average_alignment_forward(TimeSeries{1}, TimeSeries{2}, Gamma{1.0})(0, 0) == 1.0);

    Matrix expected(2, 2);
    expected << 1, 1.0 / 3, 1.0 / 3, 1;
    const auto e2 = average_alignment_forward(TimeSeries{0, 0}, TimeSeries{0, 0}, Gamma{1.0});
    CHECK((e2 - expected).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = random_series(rng, 1, 3);
        const auto y = random_series(rng, 1, 5);
        const auto fwd = average_alignment_forward(x, y, Gamma{0.7});
        const auto brute = brute_force_expected_alignment(x, y, Gamma{0.7});
        const auto back = sdtw_backward(sdtw_forward(x, y, Gamma{0.7}), cost_matrix(x, y));
        CHECK((fwd - brute).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((fwd - back).cwiseAbs().maxCoeff() < 1e-8);
    }

    CHECK_THROWS_AS(average_alignment_forward(random_series(rng, 1, 21), random_series(rng, 1, 20),
                                              Gamma{1.0}),
                    std::length_error);
}

TEST_CASE("three-way agreement on random instances") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 60; ++trial) {
        const auto n = uniform_int(rng, 1, 5);
        const auto m = uniform_int(rng, 1, 5);
        const auto p = trial % 2 ? 3 : 1;
        const auto x = random_series(rng, p, n);
        const auto y = random_series(rng, p, m);
        for (double g : {0.1, 1.0, 10.0}) {
            const auto back = sdtw_backward(sdtw_forward(x, y, Gamma{g}), cost_matrix(x, y));
            const auto brute = brute_force_expected_alignment(x, y, Gamma{g});
            const auto fwd = average_alignment_forward(x, y, Gamma{g});
            CHECK((back - brute).cwiseAbs().maxCoeff() < 1e-8);
            CHECK((back - fwd).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("numeric_gradient on a quadratic") {
    Matrix x(2, 2);
    x << 1, -2, 0.5, 3;
    const auto g = numeric_gradient([](const Matrix& v) { return v.squaredNorm(); }, x);
    CHECK(relative_error(g, Matrix(2.0 * x)) < 1e-9);
    CHECK(relative_error(Matrix::Zero(2, 2), Matrix::Zero(2, 2)) == 0.0);
}
