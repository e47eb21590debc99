// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// usage: acceptance <softdtw-cli> <fixture-dir> [criterion...]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "softdtw/barycenter.hpp"
#include "softdtw/clustering.hpp"
#include "softdtw/mlp.hpp"
#include "softdtw/oracle.hpp"
#include "softdtw/report.hpp"
#include "softdtw/soft_dtw.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace softdtw;
using namespace softdtw::testing;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Same random instances for the value and gradient criteria.
struct OracleCase {
    TimeSeries x, y;
};

std::vector<OracleCase> oracle_cases() {
    std::mt19937_64 rng(20170301);
    std::vector<OracleCase> cases;
    for (int k = 0; k < 200; ++k) {
        const Eigen::Index p = (k % 2) ? 3 : 1;
        auto x = random_series(rng, p, uniform_int(rng, 1, 5));
        auto y = random_series(rng, p, uniform_int(rng, 1, 5));
        cases.push_back({std::move(x), std::move(y)});
    }
    return cases;
}

Outcome oracle_value() {
    double worst = 0.0;
    for (const auto& c : oracle_cases())
        for (double g : {0.0, 0.1, 1.0, 10.0}) {
            const double dp = sdtw_forward(c.x, c.y, Gamma(g)).value;
            const double brute = oracle::brute_force_sdtw(c.x, c.y, Gamma(g));
            worst = std::max(worst, oracle::relative_error(dp, brute));
        }
    return {worst <= 1e-10, "max relative error " + fmt(worst)};
}

Outcome oracle_gradient() {
    double worst = 0.0, corner = 0.0;
    for (const auto& c : oracle_cases())
        for (double g : {0.1, 1.0, 10.0}) {
            const Gamma gamma(g);
            const auto delta = cost_matrix(c.x, c.y);
            const Matrix e = sdtw_backward(sdtw_forward(delta, gamma), delta);
            const Matrix gibbs = oracle::brute_force_expected_alignment(c.x, c.y, gamma);
            const Matrix quartic = oracle::average_alignment_forward(c.x, c.y, gamma);
            worst = std::max({worst, (e - gibbs).cwiseAbs().maxCoeff(), (e - quartic).cwiseAbs().maxCoeff(),
                              (gibbs - quartic).cwiseAbs().maxCoeff()});
            corner = std::max({corner, std::abs(e(0, 0) - 1.0), std::abs(e(e.rows() - 1, e.cols() - 1) - 1.0)});
        }
    return {worst <= 1e-8 && corner <= 1e-12,
            "max entrywise disagreement " + fmt(worst) + ", corner deviation " + fmt(corner)};
}

Outcome finite_difference() {
    std::mt19937_64 rng(3);
    double worst_x = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Eigen::Index p = uniform_int(rng, 1, 2);
        const auto x = random_series(rng, p, uniform_int(rng, 1, 12));
        const auto y = random_series(rng, p, uniform_int(rng, 1, 12));
        for (double g : {0.1, 1.0}) {
            const Gamma gamma(g);
            const Matrix analytic = sdtw_value_and_grad(x, y, gamma).gradient;
            const Matrix numeric = oracle::numeric_gradient(
                [&](const Matrix& v) { return sdtw_value(TimeSeries(v), y, gamma); }, x.values(), 1e-5);
            worst_x = std::max(worst_x, oracle::relative_error(analytic, numeric));
        }
    }
    double worst_mlp = 0.0;
    for (int k = 0; k < 10; ++k) {
        const Eigen::Index p = uniform_int(rng, 1, 2);
        const Eigen::Index n = uniform_int(rng, 2, 12);
        std::vector<PredictionPair> batch;
        for (int b = 0; b < 3; ++b) batch.push_back(split_series(random_series(rng, p, n), 0.6));
        const auto t = batch.front().input.length();
        auto params = MlpParams::zeros(p, t, n - t, uniform_int(rng, 1, 8));
        params.assign(random_matrix(rng, params.parameter_count(), 1, 0.7));
        for (double g : {0.1, 1.0}) {
            const auto mode = LossMode::soft_dtw(g);
            const Matrix analytic = training_grad(params, batch, mode).flatten();
            const Matrix numeric = oracle::numeric_gradient(
                [&](const Matrix& theta) {
                    auto q = params;
                    q.assign(theta);
                    return training_loss(q, batch, mode);
                },
                Matrix(params.flatten()), 1e-5);
            worst_mlp = std::max(worst_mlp, oracle::relative_error(analytic, numeric));
        }
    }
    return {worst_x <= 1e-5 && worst_mlp <= 1e-4,
            "x-gradient error " + fmt(worst_x) + ", network gradient error " + fmt(worst_mlp)};
}

Outcome sandwich() {
    std::mt19937_64 rng(4);
    constexpr double slack = 1e-12;
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const Eigen::Index p = uniform_int(rng, 1, 3);
        const auto x = random_series(rng, p, uniform_int(rng, 1, 6));
        const auto y = random_series(rng, p, uniform_int(rng, 1, 6));
        const double hard = dtw(x, y);
        const double log_d = std::log(static_cast<double>(oracle::delannoy(
            static_cast<std::uint64_t>(x.length() - 1), static_cast<std::uint64_t>(y.length() - 1))));
        double previous = hard;
        for (double g : {0.01, 0.1, 1.0}) {
            const double soft = sdtw_value(x, y, Gamma(g));
            if (soft > hard + slack || soft < hard - g * log_d - slack || soft > previous + slack) ++violations;
            previous = soft;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations in 300 checks"};
}

Outcome complexity() {
    std::mt19937_64 rng(5);
    auto median_time = [&](Eigen::Index n) {
        const auto x = random_series(rng, 1, n);
        const auto y = random_series(rng, 1, n);
        const Gamma gamma(1.0);
        std::vector<double> times;
        double sink = 0.0;
        for (int run = 0; run < 23; ++run) {
            const auto start = Clock::now();
            const auto delta = cost_matrix(x, y);
            const auto table = sdtw_forward(delta, gamma);
            sink += sdtw_backward(table, delta)(0, 0);
            if (run >= 3) times.push_back(seconds_since(start));
        }
        if (!std::isfinite(sink)) std::cerr << "non-finite result\n";
        std::nth_element(times.begin(), times.begin() + 10, times.end());
        return times[10];
    };
    const double small = median_time(200);
    const double large = median_time(400);
    const double ratio = large / small;
    return {ratio >= 2.5 && ratio <= 6.0,
            "median " + fmt(small * 1e3) + " ms at 200, " + fmt(large * 1e3) + " ms at 400, ratio " + fmt(ratio)};
}

// Ten shifted copies of one z-normalized bump with additive noise.
std::vector<TimeSeries> bump_family(std::mt19937_64& rng, Eigen::Index length) {
    std::uniform_real_distribution<double> center(0.35 * length, 0.65 * length);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<TimeSeries> family;
    for (int i = 0; i < 10; ++i) {
        Matrix v = z_normalize(bump_series(length, center(rng), 0.06 * length)).values();
        for (Eigen::Index t = 0; t < length; ++t) v(0, t) += noise(rng);
        family.emplace_back(std::move(v));
    }
    return family;
}

Outcome smoothing_helps_averaging() {
    std::mt19937_64 rng(6);
    int wins = 0;
    std::ostringstream detail;
    for (int f = 0; f < 20; ++f) {
        const auto problem = BarycenterProblem::uniform(bump_family(rng, 40), 40);
        const auto init = init_random(problem, rng());
        OptimizerConfig config;
        config.max_iterations = 100;
        const auto soft = soft_barycenter(problem, Gamma(0.01), init, config);
        const auto dba = dba_barycenter(problem, init, config);
        const double soft_loss = barycenter_objective(soft.barycenter, problem, Gamma(0.0));
        const double dba_loss = barycenter_objective(dba.barycenter, problem, Gamma(0.0));
        if (soft_loss <= dba_loss) ++wins;
    }
    detail << "soft-DTW loss <= DBA loss in " << wins << "/20 families";
    return {wins >= 16, detail.str()};
}

Outcome clustering() {
    int good = 0;
    bool monotone = true;
    std::ostringstream aris;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(700 + seed);
        auto data = planted_dataset(rng, 3, 15, 40, 0.1);
        for (auto& s : data.series) s = z_normalize(s);
        KMeansConfig config;
        config.seed = seed;
        const auto result = lloyd_kmeans(data.series, 3, Gamma(1.0), config);
        std::vector<std::size_t> truth(data.labels.begin(), data.labels.end());
        const double ari = adjusted_rand_index(truth, result.assignments);
        if (ari >= 0.9) ++good;
        aris << (seed ? " " : "") << fmt(ari);
        for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
            if (result.objective_trace[i] > result.objective_trace[i - 1]) monotone = false;
    }
    return {good >= 8 && monotone, "ARI >= 0.9 in " + std::to_string(good) + "/10 seeds [" + aris.str() +
                                       "], trace " + (monotone ? "non-increasing" : "INCREASED")};
}

// Noisy sine input; the target is flat except for one sharp spike whose
// position is jittered independently of the input.
std::vector<PredictionPair> spike_task(std::mt19937_64& rng, std::size_t count) {
    constexpr Eigen::Index input_length = 18, target_length = 12;
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    std::uniform_int_distribution<int> jitter(-3, 3);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<PredictionPair> pairs;
    for (std::size_t k = 0; k < count; ++k) {
        const double ph = phase(rng);
        std::vector<double> in(input_length), out(target_length, 0.0);
        for (Eigen::Index t = 0; t < input_length; ++t) in[t] = std::sin(0.5 * t + ph) + noise(rng);
        out[static_cast<std::size_t>(6 + jitter(rng))] = 1.0;
        for (auto& v : out) v += noise(rng);
        pairs.push_back({TimeSeries(in), TimeSeries(out)});
    }
    return pairs;
}

Outcome prediction_direction() {
    int dtw_wins = 0, euclid_wins = 0;
    std::ostringstream detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(800 + seed);
        const auto train = spike_task(rng, 100);
        const auto test = spike_task(rng, 100);
        TrainConfig base;
        base.epochs = 150;
        base.hidden = 32;
        base.learning_rate = 1e-2;
        base.seed = seed;
        const auto euclid = train_predictor(train, base);

        TrainConfig soft = base;
        soft.mode = LossMode::soft_dtw(0.01);
        soft.init = PredictorInit::euclidean_warm_start;
        soft.warm_start_epochs = base.epochs;
        const auto sdtw = train_predictor(train, soft);

        const auto e = evaluate_predictor(euclid.params, test);
        const auto s = evaluate_predictor(sdtw.params, test);
        if (s.dtw < e.dtw) ++dtw_wins;
        if (e.euclidean < s.euclidean) ++euclid_wins;
        detail << (seed ? "; " : "") << "DTW " << fmt(s.dtw) << " vs " << fmt(e.dtw) << ", Euc " << fmt(s.euclidean)
               << " vs " << fmt(e.euclidean);
    }
    return {dtw_wins >= 4 && euclid_wins >= 4, "soft-DTW lower DTW in " + std::to_string(dtw_wins) +
                                                   "/5, Euclidean lower Euclidean in " + std::to_string(euclid_wins) +
                                                   "/5 (" + detail.str() + ")"};
}

std::string capture(const std::string& command, int& status) {
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) throw std::runtime_error("cannot run " + command);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
    status = pclose(pipe.release());
    return out;
}

Outcome determinism(const std::string& cli, const std::string& data) {
    const std::vector<std::string> commands{
        "dist --x 0,1,2,1 --y 0,2,1 --gamma 0.1",
        "dist --data " + data + "/micro.tsv --gamma 1 --normalize",
        "grad --x 0,1,2,1 --y 0,2,1 --gamma 0.1",
        "barycenter --data " + data + "/planted_train.csv --method soft --gamma 0.1 --repeats 3 --seed 9",
        "barycenter --data " + data + "/planted_train.csv --method dba --init euclidean --repeats 2 --seed 9",
        "barycenter --data " + data + "/planted_train.csv --method subgradient --repeats 2 --seed 9",
        "kmeans --data " + data + "/planted_train.csv --gamma 1 --seed 9",
        "classify --train " + data + "/planted_train.csv --max-iter 20 --seed 9",
        "predict --train " + data + "/planted_train.csv --test " + data +
            "/planted_test.csv --loss sdtw --gamma 0.1 --init euclidean-warm-start --epochs 20 --hidden 8 --seed 9",
        "verify --data " + data + "/micro.tsv --pairs 40 --fd-pairs 10 --seed 9",
    };
    const auto dir = std::filesystem::temp_directory_path();
    int identical = 0;
    std::string mismatched;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string out[2];
        ExperimentReport reports[2];
        bool ok = true;
        for (int run = 0; run < 2; ++run) {
            const auto report = dir / ("softdtw_acceptance_" + std::to_string(c) + "_" + std::to_string(run) + ".txt");
            int status = 0;
            out[run] = capture("\"" + cli + "\" " + commands[c] + " --report \"" + report.string() + "\" 2>&1", status);
            ok = ok && status == 0;
            if (ok) reports[run] = load_report(report).without_volatile();
            std::filesystem::remove(report);
        }
        if (ok && out[0] == out[1] && reports[0] == reports[1] && !out[0].empty())
            ++identical;
        else
            mismatched += " [" + commands[c].substr(0, commands[c].find(' ')) + "]";
    }
    return {identical == static_cast<int>(commands.size()),
            std::to_string(identical) + "/" + std::to_string(commands.size()) + " commands reproducible" +
                mismatched};
}

// Bumps of unequal height, each taking the larger weight in turn.
Outcome interpolation() {
    const auto low = bump_series(40, 12.0, 2.5, 1.0);
    const auto high = bump_series(40, 28.0, 2.5, 2.0);
    bool ok = true;
    std::string detail;
    for (int flip = 0; flip < 2; ++flip) {
        const auto& lighter = flip ? high : low;
        const auto& heavier = flip ? low : high;
        const BarycenterProblem problem({lighter, heavier}, {0.25, 0.75}, 40);
        const auto result = soft_barycenter(problem, Gamma(1.0), init_euclidean_mean(problem));
        const double to_heavy = dtw(result.barycenter, heavier);
        const double to_light = dtw(result.barycenter, lighter);
        ok = ok && to_heavy < to_light;
        detail += std::string(flip ? "; " : "") + (flip ? "low" : "high") + " bump heavier: DTW to heavier " +
                  fmt(to_heavy) + ", to lighter " + fmt(to_light);
    }
    return {ok, detail};
}

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;  // 0 = no runtime bound
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <softdtw-cli> <fixture-dir> [criterion...]\n";
        return 1;
    }
    const std::string cli = argv[1];
    const std::string data = argv[2];
    std::set<int> only;
    for (int i = 3; i < argc; ++i) only.insert(std::stoi(argv[i]));

    const std::vector<Criterion> criteria{
        {1, "oracle equivalence (value)", 10, oracle_value},
        {2, "oracle equivalence (gradient)", 30, oracle_gradient},
        {3, "finite-difference gradient", 60, finite_difference},
        {4, "sandwich and monotonicity", 0, sandwich},
        {5, "quadratic complexity scaling", 0, complexity},
        {6, "smoothing helps averaging", 600, smoothing_helps_averaging},
        {7, "clustering sanity", 0, clustering},
        {8, "prediction direction", 600, prediction_direction},
        {9, "CLI determinism", 0, [&] { return determinism(cli, data); }},
        {10, "interpolation ordering", 0, interpolation},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(start);
        std::string timing = fmt(elapsed) + " s";
        if (c.budget_seconds > 0 && elapsed > c.budget_seconds) {
            outcome.passed = false;
            timing += " exceeds " + fmt(c.budget_seconds) + " s budget";
        }
        if (!outcome.passed) ++failures;
        std::cout << (outcome.passed ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " -- "
                  << outcome.detail << " (" << timing << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
