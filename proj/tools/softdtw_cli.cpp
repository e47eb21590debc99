// softdtw command-line driver.
//
// Exit codes: 0 success, 1 usage or input error, 2 verification failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softdtw/barycenter.hpp"
#include "softdtw/clustering.hpp"
#include "softdtw/dataset.hpp"
#include "softdtw/mlp.hpp"
#include "softdtw/random.hpp"
#include "softdtw/report.hpp"
#include "softdtw/soft_dtw.hpp"
#include "softdtw/verify.hpp"

using namespace softdtw;

namespace {

constexpr int kUsageError = 1;
constexpr int kVerifyFailure = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Always shows a decimal point or exponent, so 1 prints as 1.0.
std::string show(double v) {
    auto s = format_number(v);
    if (s.find_first_of(".eni") == std::string::npos) s += ".0";
    return s;
}

// "1,2,3" is univariate; "1,2,3;4,5,6" has one row per feature.
TimeSeries parse_series_literal(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream features(text);
    std::string row;
    while (std::getline(features, row, ';')) {
        std::vector<double> values;
        std::stringstream cells(row);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            try {
                values.push_back(parse_number(cell));
            } catch (const std::exception&) {
                throw UsageError("bad series value '" + cell + "'");
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty() || rows.front().empty()) throw UsageError("empty series literal");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t d = 0; d < rows.size(); ++d) {
        if (rows[d].size() != rows.front().size()) throw UsageError("feature rows differ in length");
        for (std::size_t t = 0; t < rows[d].size(); ++t) m(d, t) = rows[d][t];
    }
    return TimeSeries(std::move(m));
}

Dataset load(const std::string& path) {
    try {
        return load_ucr(path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

Gamma gamma_arg(double g) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw UsageError("--gamma must be a finite nonnegative number");
    return Gamma(g);
}

void print_csv_matrix(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << (j ? "," : "") << show(m(i, j));
        std::cout << '\n';
    }
}

// Shared by every subcommand.
struct Common {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string report_path;

    void attach(CLI::App* app) {
        app->add_option("--seed", seed, "Seed for every random sub-stream")->capture_default_str();
        app->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
        app->add_option("--report", report_path, "Write an experiment report to this path");
    }

    void finish(ExperimentReport& report, std::chrono::steady_clock::time_point start) const {
        if (report_path.empty()) return;
        report.timestamp = utc_timestamp();
        report.set_config("seed", static_cast<unsigned long long>(seed));
        report.set_config("threads", static_cast<unsigned long long>(threads));
        report.set_timing("total_seconds",
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        emit_report(report, std::filesystem::path(report_path));
    }
};

// ---- dist -----------------------------------------------------------------

struct DistCmd {
    Common common;
    std::string x, y, data, data2;
    double gamma = 1.0;
    bool normalize = false;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--x", x, "Series literal, e.g. 0,1,2 or 0,1;2,3 (rows are features)");
        app->add_option("--y", y, "Series literal");
        app->add_option("--data", data, "UCR file; prints the matrix of pairwise values");
        app->add_option("--data2", data2, "Second UCR file for cross distances (default: --data)");
        app->add_option("--gamma", gamma, "Smoothing parameter")->capture_default_str();
        app->add_flag("--normalize", normalize, "Divide each value by n * m");
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        const Gamma g = gamma_arg(gamma);
        ExperimentReport report;
        report.command = "dist";
        report.set_config("gamma", gamma);
        report.set_config("normalize", normalize);
        auto value = [&](const TimeSeries& a, const TimeSeries& b) {
            if (a.dims() != b.dims()) throw UsageError("series have different feature counts");
            const double v = sdtw_value(a, b, g);
            return normalize ? v / static_cast<double>(a.length() * b.length()) : v;
        };
        if (!x.empty() || !y.empty()) {
            if (x.empty() || y.empty() || !data.empty()) throw UsageError("dist needs both --x and --y, or --data");
            const double v = value(parse_series_literal(x), parse_series_literal(y));
            std::cout << show(v) << '\n';
            report.set_config("x", x);
            report.set_config("y", y);
            report.set_metric("value", v);
        } else {
            if (data.empty()) throw UsageError("dist needs --x/--y or --data");
            const auto a = load(data);
            const auto b = data2.empty() ? a : load(data2);
            std::vector<SeriesPair> pairs;
            for (const auto& s : a.series)
                for (const auto& t : b.series) {
                    if (s.dims() != t.dims()) throw UsageError("series have different feature counts");
                    pairs.emplace_back(s, t);
                }
            const auto values = sdtw_batch(pairs, g, common.threads);
            Matrix m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
            for (std::size_t i = 0; i < a.size(); ++i)
                for (std::size_t j = 0; j < b.size(); ++j) {
                    double v = values[i * b.size() + j];
                    if (normalize) v /= static_cast<double>(a.series[i].length() * b.series[j].length());
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                }
            print_csv_matrix(m);
            report.set_config("data", data);
            report.set_config("data2", data2.empty() ? data : data2);
            std::vector<std::string> cols;
            for (std::size_t j = 0; j < b.size(); ++j) cols.push_back("y" + std::to_string(j));
            auto& table = report.add_table("values", cols);
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                table.add_row(std::vector<double>(m.row(i).begin(), m.row(i).end()));
        }
        common.finish(report, start);
        return 0;
    }
};

// ---- grad -----------------------------------------------------------------

struct GradCmd {
    Common common;
    std::string x, y;
    double gamma = 1.0;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--x", x, "Series literal (the argument of the gradient)")->required();
        app->add_option("--y", y, "Series literal")->required();
        app->add_option("--gamma", gamma, "Smoothing parameter; 0 gives the optimal path")->capture_default_str();
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        const Gamma g = gamma_arg(gamma);
        const auto xs = parse_series_literal(x);
        const auto ys = parse_series_literal(y);
        if (xs.dims() != ys.dims()) throw UsageError("series have different feature counts");
        const auto delta = cost_matrix(xs, ys);
        const auto table = sdtw_forward(delta, g);
        const Matrix e = g.hard() ? optimal_path_backtrack(table, delta).to_matrix(xs.length(), ys.length())
                                  : sdtw_backward(table, delta);
        const Matrix grad = jacobian_apply(xs, ys, e);

        std::cout << "# value\n" << show(table.value) << "\n# E\n";
        print_csv_matrix(e);
        std::cout << "# grad_x\n";
        print_csv_matrix(grad);

        ExperimentReport report;
        report.command = "grad";
        report.set_config("x", x);
        report.set_config("y", y);
        report.set_config("gamma", gamma);
        report.set_metric("value", table.value);
        auto add = [&](const std::string& name, const Matrix& m) {
            std::vector<std::string> cols;
            for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back("c" + std::to_string(j));
            auto& t = report.add_table(name, cols);
            for (Eigen::Index i = 0; i < m.rows(); ++i) t.add_row(std::vector<double>(m.row(i).begin(), m.row(i).end()));
        };
        add("E", e);
        add("grad_x", grad);
        common.finish(report, start);
        return 0;
    }
};

// ---- barycenter -----------------------------------------------------------

const std::map<std::string, CenterMethod> kMethods{
    {"soft", CenterMethod::soft}, {"dba", CenterMethod::dba}, {"subgradient", CenterMethod::subgradient}};
const std::map<std::string, InitMode> kInits{{"random", InitMode::random}, {"euclidean", InitMode::euclidean}};

TimeSeries euclidean_start(const std::vector<TimeSeries>& members, Eigen::Index length) {
    std::vector<TimeSeries> resampled;
    for (const auto& s : members) resampled.push_back(resample_linear(s, length));
    return init_euclidean_mean(BarycenterProblem::uniform(std::move(resampled), length));
}

BarycenterResult run_method(CenterMethod method, const BarycenterProblem& problem, Gamma gamma,
                            const TimeSeries& init, const OptimizerConfig& config) {
    switch (method) {
        case CenterMethod::soft:
            if (gamma.hard()) throw UsageError("--method soft needs --gamma > 0");
            return soft_barycenter(problem, gamma, init, config);
        case CenterMethod::dba: return dba_barycenter(problem, init, config);
        case CenterMethod::subgradient: return subgradient_barycenter(problem, init, config);
    }
    throw std::logic_error("unknown method");
}

struct BarycenterCmd {
    Common common;
    std::string data, output;
    std::string method = "soft", init = "random";
    double gamma = 1.0;
    int max_iter = 100;
    int repeats = 10;
    int per_class = 10;
    std::optional<int> label;
    Eigen::Index length = 0;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--data", data, "UCR file")->required();
        app->add_option("--method", method, "soft | dba | subgradient")
            ->check(CLI::IsMember({"soft", "dba", "subgradient"}))
            ->capture_default_str();
        app->add_option("--gamma", gamma, "Smoothing parameter for --method soft")->capture_default_str();
        app->add_option("--init", init, "random | euclidean")->check(CLI::IsMember({"random", "euclidean"}))->capture_default_str();
        app->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
        app->add_option("--repeats", repeats, "Independent repeats")->capture_default_str();
        app->add_option("--per-class", per_class, "Series sampled per repeat")->capture_default_str();
        app->add_option("--class", label, "Average this class every repeat (default: random class)");
        app->add_option("--length", length, "Barycenter length (default: median of the sample)");
        app->add_option("--output", output, "Write the barycenters as a UCR file");
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        const Gamma g = gamma_arg(gamma);
        if (repeats < 1 || per_class < 1 || max_iter < 0) throw UsageError("counts must be positive");
        const auto d = load(data);
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < d.size(); ++i) by_class[d.labeled() ? d.labels[i] : 0].push_back(i);
        if (label && !by_class.count(*label)) throw UsageError("no series with class " + std::to_string(*label));

        ExperimentReport report;
        report.command = "barycenter";
        report.set_config("data", data);
        report.set_config("method", method);
        report.set_config("gamma", gamma);
        report.set_config("init", init);
        report.set_config("max_iter", max_iter);
        report.set_config("repeats", repeats);
        report.set_config("per_class", per_class);
        report.set_config("class", label ? std::to_string(*label) : std::string("random"));
        report.set_config("length", static_cast<long long>(length));
        auto& runs = report.add_table(
            "repeats", {"repeat", "class", "size", "iterations", "initial_objective", "final_objective", "dtw_loss"});

        auto sampling = substream(common.seed, "sampling");
        auto init_rng = substream(common.seed, "init");
        OptimizerConfig config;
        config.max_iterations = max_iter;
        config.threads = common.threads;

        Dataset out;
        double first_initial = 0.0, last_final = 0.0, dtw_sum = 0.0;
        std::cout << "repeat,class,initial_objective,final_objective,dtw_loss\n";
        for (int r = 0; r < repeats; ++r) {
            int cls = label ? *label : 0;
            if (!label) {
                auto it = by_class.begin();
                std::advance(it, std::uniform_int_distribution<std::size_t>(0, by_class.size() - 1)(sampling));
                cls = it->first;
            }
            const auto& pool = by_class.at(cls);
            std::vector<std::size_t> chosen;
            std::sample(pool.begin(), pool.end(), std::back_inserter(chosen),
                        std::min<std::size_t>(pool.size(), static_cast<std::size_t>(per_class)), sampling);
            std::vector<TimeSeries> members;
            for (auto i : chosen) members.push_back(d.series[i]);
            const Eigen::Index len = length > 0 ? length : median_length(members);
            const auto problem = BarycenterProblem::uniform(members, len);
            const std::uint64_t init_seed = init_rng();
            const TimeSeries start_point =
                kInits.at(init) == InitMode::random ? init_random(problem, init_seed) : euclidean_start(members, len);
            config.seed = init_seed;
            const auto result = run_method(kMethods.at(method), problem, g, start_point, config);
            const double loss = barycenter_objective(result.barycenter, problem, Gamma(0.0));
            std::cout << r << ',' << cls << ',' << show(result.trace.front()) << ',' << show(result.trace.back())
                      << ',' << show(loss) << '\n';
            runs.add_row({std::to_string(r), std::to_string(cls), std::to_string(members.size()),
                          std::to_string(result.iterations), format_number(result.trace.front()),
                          format_number(result.trace.back()), format_number(loss)});
            if (r == 0) first_initial = result.trace.front();
            last_final = result.trace.back();
            dtw_sum += loss;
            out.series.push_back(result.barycenter);
            out.labels.push_back(cls);
        }
        report.set_metric("initial_objective", first_initial);
        report.set_metric("final_objective", last_final);
        report.set_metric("mean_dtw_loss", dtw_sum / repeats);
        if (!output.empty()) write_ucr(out, std::filesystem::path(output));
        common.finish(report, start);
        return 0;
    }
};

// ---- kmeans ---------------------------------------------------------------

struct KMeansCmd {
    Common common;
    std::string data;
    std::string method = "soft", init = "random";
    double gamma = 1.0;
    std::size_t k = 0;
    int outer_iter = 30;
    int inner_iter = 100;
    Eigen::Index length = 0;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--data", data, "UCR file")->required();
        app->add_option("--k", k, "Number of clusters (default: number of classes)");
        app->add_option("--gamma", gamma, "Smoothing parameter")->capture_default_str();
        app->add_option("--method", method, "soft | dba | subgradient")
            ->check(CLI::IsMember({"soft", "dba", "subgradient"}))
            ->capture_default_str();
        app->add_option("--init", init, "random | euclidean")->check(CLI::IsMember({"random", "euclidean"}))->capture_default_str();
        app->add_option("--outer-iter", outer_iter, "Lloyd iterations")->capture_default_str();
        app->add_option("--inner-iter", inner_iter, "Barycenter iterations per centroid")->capture_default_str();
        app->add_option("--length", length, "Centroid length (default: median)");
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        const Gamma g = gamma_arg(gamma);
        const auto d = load(data);
        std::size_t clusters = k;
        if (clusters == 0) {
            if (!d.labeled()) throw UsageError("--k is required for unlabeled data");
            clusters = d.classes().size();
        }
        if (clusters > d.size()) throw UsageError("--k exceeds the number of series");
        if (kMethods.at(method) == CenterMethod::soft && g.hard()) throw UsageError("--method soft needs --gamma > 0");

        KMeansConfig config;
        config.outer_iterations = outer_iter;
        config.inner.max_iterations = inner_iter;
        config.inner.threads = common.threads;
        config.method = kMethods.at(method);
        config.init = kInits.at(init);
        config.seed = substream(common.seed, "init")();
        config.centroid_length = length;
        config.threads = common.threads;
        const auto result = lloyd_kmeans(d.series, clusters, g, config);

        ExperimentReport report;
        report.command = "kmeans";
        report.set_config("data", data);
        report.set_config("k", static_cast<unsigned long long>(clusters));
        report.set_config("gamma", gamma);
        report.set_config("method", method);
        report.set_config("init", init);
        report.set_config("outer_iter", outer_iter);
        report.set_config("inner_iter", inner_iter);
        report.set_config("length", static_cast<long long>(length));
        report.set_metric("objective", result.objective_trace.back());
        report.set_metric("iterations", result.iterations);
        report.set_metric("converged", result.converged ? 1.0 : 0.0);

        std::cout << "objective," << show(result.objective_trace.back()) << '\n';
        std::cout << "iterations," << result.iterations << '\n';
        if (d.labeled()) {
            std::vector<std::size_t> truth;
            for (int l : d.labels) truth.push_back(static_cast<std::size_t>(l - *std::min_element(d.labels.begin(), d.labels.end())));
            const double ari = adjusted_rand_index(truth, result.assignments);
            std::cout << "ari," << show(ari) << '\n';
            report.set_metric("ari", ari);
        }
        std::cout << "assignments";
        for (auto a : result.assignments) std::cout << ',' << a;
        std::cout << '\n';

        auto& trace = report.add_table("trace", {"iteration", "objective"});
        for (std::size_t i = 0; i < result.objective_trace.size(); ++i)
            trace.add_row(std::vector<double>{static_cast<double>(i), result.objective_trace[i]});
        auto& assign = report.add_table("assignments", {"series", "cluster"});
        for (std::size_t i = 0; i < result.assignments.size(); ++i)
            assign.add_row({std::to_string(i), std::to_string(result.assignments[i])});
        common.finish(report, start);
        return 0;
    }
};

// ---- classify -------------------------------------------------------------

struct ClassifyCmd {
    Common common;
    std::string train, validation, test;
    std::vector<double> gammas;
    int max_iter = 100;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--train", train, "Training UCR file (split 50/25/25 when --test is absent)")->required();
        app->add_option("--validation", validation, "Validation UCR file (default: a third of --train)");
        app->add_option("--test", test, "Test UCR file");
        app->add_option("--gamma", gammas, "Candidate gammas (default: 15 log-spaced in [1e-3, 10])");
        app->add_option("--max-iter", max_iter, "Barycenter iterations per class")->capture_default_str();
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        const auto all = load(train);
        if (!all.labeled()) throw UsageError("classification needs labeled data");
        const std::uint64_t split_seed = substream(common.seed, "split")();
        Dataset tr, va, te;
        try {
            if (test.empty()) {
                const std::vector<double> f{0.5, 0.25, 0.25};
                auto parts = split_dataset(all, f, split_seed);
                tr = parts[0], va = parts[1], te = parts[2];
            } else {
                te = load(test);
                if (!validation.empty()) {
                    tr = all;
                    va = load(validation);
                } else {
                    const std::vector<double> f{2.0 / 3.0, 1.0 / 3.0};
                    auto parts = split_dataset(all, f, split_seed);
                    tr = parts[0], va = parts[1];
                }
            }
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
        auto candidates = gammas.empty() ? log_spaced(1e-3, 10.0, 15) : gammas;
        for (double g : candidates) gamma_arg(g);

        OptimizerConfig config;
        config.max_iterations = max_iter;
        config.seed = substream(common.seed, "init")();
        config.threads = common.threads;
        const auto selection = select_gamma(tr, va, candidates, config);
        const auto model = nearest_centroid_fit(tr, selection.gamma, config);
        const double test_acc = classification_accuracy(model, te);
        const double val_acc = *std::max_element(selection.validation_accuracy.begin(), selection.validation_accuracy.end());

        std::cout << "gamma," << show(selection.gamma.value()) << '\n';
        std::cout << "validation_accuracy," << show(val_acc) << '\n';
        std::cout << "test_accuracy," << show(test_acc) << '\n';

        ExperimentReport report;
        report.command = "classify";
        report.set_config("train", train);
        report.set_config("validation", validation.empty() ? std::string("split") : validation);
        report.set_config("test", test.empty() ? std::string("split") : test);
        std::string grid;
        for (std::size_t i = 0; i < candidates.size(); ++i) grid += (i ? " " : "") + format_number(candidates[i]);
        report.set_config("gamma_grid", grid);
        report.set_config("max_iter", max_iter);
        report.set_config("train_size", static_cast<unsigned long long>(tr.size()));
        report.set_config("validation_size", static_cast<unsigned long long>(va.size()));
        report.set_config("test_size", static_cast<unsigned long long>(te.size()));
        report.set_metric("gamma", selection.gamma.value());
        report.set_metric("validation_accuracy", val_acc);
        report.set_metric("test_accuracy", test_acc);
        auto& table = report.add_table("grid", {"gamma", "validation_accuracy"});
        for (std::size_t i = 0; i < candidates.size(); ++i)
            table.add_row(std::vector<double>{candidates[i], selection.validation_accuracy[i]});
        common.finish(report, start);
        return 0;
    }
};

// ---- predict --------------------------------------------------------------

struct PredictCmd {
    Common common;
    std::string train, test, model_out;
    std::string loss = "sdtw", init = "random";
    double gamma = 1.0;
    double fraction = 0.6;
    int epochs = 200;
    int batch = 16;
    double learning_rate = 1e-3;
    Eigen::Index hidden = 64;
    int warm_epochs = 0;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--train", train, "Training UCR file (split 50/50 when --test is absent)")->required();
        app->add_option("--test", test, "Test UCR file");
        app->add_option("--loss", loss, "euclidean | sdtw")->check(CLI::IsMember({"euclidean", "sdtw"}))->capture_default_str();
        app->add_option("--gamma", gamma, "Smoothing parameter of the sdtw loss")->capture_default_str();
        app->add_option("--init", init, "random | euclidean-warm-start")
            ->check(CLI::IsMember({"random", "euclidean-warm-start"}))
            ->capture_default_str();
        app->add_option("--fraction", fraction, "Share of each series used as input")->capture_default_str();
        app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
        app->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
        app->add_option("--lr", learning_rate, "Adam learning rate")->capture_default_str();
        app->add_option("--hidden", hidden, "Hidden units")->capture_default_str();
        app->add_option("--warm-epochs", warm_epochs, "Euclidean warm-start epochs (default: --epochs)");
        app->add_option("--model-out", model_out, "Save the trained network here");
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("--fraction must lie in (0, 1)");
        if (epochs < 0 || batch < 1 || hidden < 1) throw UsageError("invalid training sizes");
        Dataset tr, te;
        try {
            if (test.empty()) {
                const std::vector<double> f{0.5, 0.5};
                auto parts = split_dataset(load(train), f, substream(common.seed, "split")());
                tr = parts[0], te = parts[1];
            } else {
                tr = load(train);
                te = load(test);
            }
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
        PredictionTask train_task, test_task;
        try {
            train_task = make_prediction_task(tr.series, fraction);
            test_task = make_prediction_task(te.series, fraction);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }

        TrainConfig config;
        config.mode = loss == "euclidean" ? LossMode::euclidean() : LossMode::soft_dtw(gamma_arg(gamma).value());
        if (config.mode.kind == LossMode::Kind::soft_dtw && config.mode.gamma.hard())
            throw UsageError("--loss sdtw needs --gamma > 0");
        config.epochs = epochs;
        config.batch_size = batch;
        config.learning_rate = learning_rate;
        config.hidden = hidden;
        config.seed = substream(common.seed, "train")();
        config.init = init == "random" ? PredictorInit::random : PredictorInit::euclidean_warm_start;
        config.warm_start_epochs = warm_epochs;
        config.threads = common.threads;
        TrainResult result;
        try {
            result = train_predictor(train_task.pairs, config);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
        PredictionScores scores;
        try {
            scores = evaluate_predictor(result.params, test_task.pairs);
        } catch (const std::domain_error& e) {
            throw UsageError(std::string("test series do not match the training shape: ") + e.what());
        }

        std::cout << "test_dtw," << show(scores.dtw) << '\n';
        std::cout << "test_euclidean," << show(scores.euclidean) << '\n';
        if (!result.history.empty()) std::cout << "final_train_loss," << show(result.history.back()) << '\n';

        ExperimentReport report;
        report.command = "predict";
        report.set_config("train", train);
        report.set_config("test", test.empty() ? std::string("split") : test);
        report.set_config("loss", loss);
        report.set_config("gamma", gamma);
        report.set_config("init", init);
        report.set_config("fraction", fraction);
        report.set_config("epochs", epochs);
        report.set_config("batch", batch);
        report.set_config("lr", learning_rate);
        report.set_config("hidden", static_cast<long long>(hidden));
        report.set_config("warm_epochs", warm_epochs);
        report.set_metric("test_dtw", scores.dtw);
        report.set_metric("test_euclidean", scores.euclidean);
        report.set_metric("aborted", result.aborted ? 1.0 : 0.0);
        auto& hist = report.add_table("history", {"phase", "epoch", "loss"});
        for (std::size_t i = 0; i < result.warm_start_history.size(); ++i)
            hist.add_row({"warm", std::to_string(i + 1), format_number(result.warm_start_history[i])});
        for (std::size_t i = 0; i < result.history.size(); ++i)
            hist.add_row({"main", std::to_string(i + 1), format_number(result.history[i])});
        if (!model_out.empty()) {
            nlohmann::json meta = {{"loss", loss},     {"gamma", gamma},   {"init", init},
                                   {"fraction", fraction}, {"epochs", epochs}, {"seed", common.seed}};
            save_mlp(model_out, result.params, meta);
        }
        common.finish(report, start);
        return result.aborted ? kUsageError : 0;
    }
};

// ---- verify ---------------------------------------------------------------

struct VerifyCmd {
    Common common;
    std::string data;
    std::size_t pairs = 200;
    std::size_t fd_pairs = 50;

    void attach(CLI::App* app) {
        common.attach(app);
        app->add_option("--data", data, "UCR fixture whose series are cross-checked as well");
        app->add_option("--pairs", pairs, "Random pairs for the exhaustive oracles")->capture_default_str();
        app->add_option("--fd-pairs", fd_pairs, "Random pairs for finite differences")->capture_default_str();
    }

    int run() const {
        const auto start = std::chrono::steady_clock::now();
        VerifyOptions options;
        options.seed = common.seed;
        options.oracle_pairs = pairs;
        options.gradient_pairs = fd_pairs;
        if (!data.empty()) options.fixtures = load(data).series;
        const auto checks = run_verification(options);

        ExperimentReport report;
        report.command = "verify";
        report.set_config("data", data);
        report.set_config("pairs", static_cast<unsigned long long>(pairs));
        report.set_config("fd_pairs", static_cast<unsigned long long>(fd_pairs));
        auto& table = report.add_table("checks", {"check", "cases", "worst", "tolerance", "status"});
        bool ok = true;
        for (const auto& c : checks) {
            const char* status = c.passed() ? "PASS" : "FAIL";
            std::printf("%-13s %6zu  worst %.3e  tol %.0e  %s\n", c.name.c_str(), c.cases, c.worst, c.tolerance, status);
            table.add_row({c.name, std::to_string(c.cases), format_number(c.worst), format_number(c.tolerance), status});
            ok = ok && c.passed();
        }
        std::cout.flush();
        report.set_metric("passed", ok ? 1.0 : 0.0);
        common.finish(report, start);
        return ok ? 0 : kVerifyFailure;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft-DTW discrepancy, gradients, barycenters, clustering and prediction"};
    app.require_subcommand(1);

    DistCmd dist;
    GradCmd grad;
    BarycenterCmd bary;
    KMeansCmd kmeans;
    ClassifyCmd classify;
    PredictCmd predict;
    VerifyCmd verify;
    dist.attach(app.add_subcommand("dist", "Soft-DTW value between series"));
    grad.attach(app.add_subcommand("grad", "Value, expected alignment and gradient as CSV"));
    bary.attach(app.add_subcommand("barycenter", "Average sampled series of one class"));
    kmeans.attach(app.add_subcommand("kmeans", "Lloyd k-means under soft-DTW"));
    classify.attach(app.add_subcommand("classify", "Nearest-centroid classification with gamma selection"));
    predict.attach(app.add_subcommand("predict", "Train and evaluate a multistep-ahead predictor"));
    verify.attach(app.add_subcommand("verify", "Cross-check against exhaustive oracles and finite differences"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "dist") return dist.run();
        if (name == "grad") return grad.run();
        if (name == "barycenter") return bary.run();
        if (name == "kmeans") return kmeans.run();
        if (name == "classify") return classify.run();
        if (name == "predict") return predict.run();
        return verify.run();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
}
