#include "softdtw/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "softdtw/parallel.hpp"
#include "softdtw/random.hpp"

namespace softdtw {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'T', 'W', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

Vector flatten_series(const TimeSeries& s) {
    return Eigen::Map<const Vector>(s.values().data(), s.values().size());
}

void check_input(const MlpParams& params, const TimeSeries& input) {
    if (input.dims() != params.dims || input.length() != params.input_length)
        throw std::domain_error("input segment does not match the network shape");
}

void check_batch(const MlpParams& params, std::span<const PredictionPair> batch) {
    if (batch.empty()) throw std::domain_error("empty training batch");
    for (const auto& pair : batch) {
        check_input(params, pair.input);
        if (pair.target.dims() != params.dims || pair.target.length() != params.output_length)
            throw std::domain_error("target segment does not match the network shape");
    }
}

double pair_loss(const TimeSeries& prediction, const TimeSeries& target, LossMode mode) {
    if (mode.kind == LossMode::Kind::euclidean)
        return (prediction.values() - target.values()).squaredNorm();
    return sdtw_value(prediction, target, mode.gamma);
}

// Hidden activations for one input.
struct Activations {
    Vector input;
    Vector hidden;
    Vector output;
};

Activations forward(const MlpParams& p, const TimeSeries& input) {
    Activations a;
    a.input = flatten_series(input);
    a.hidden = (p.w1 * a.input + p.b1).unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    a.output = p.w2 * a.hidden + p.b2;
    return a;
}

template <typename T>
void write_le(std::ostream& out, T value) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&value, bytes, sizeof(T));
    }
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated model file");
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&value, bytes, sizeof(T));
    }
    return value;
}

void write_row_major(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) write_le(out, m(i, j));
}

void read_row_major(std::istream& in, Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = read_le<double>(in);
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

}  // namespace

MlpParams MlpParams::zeros(Eigen::Index dims, Eigen::Index input_length, Eigen::Index output_length,
                           Eigen::Index hidden) {
    if (dims < 1 || input_length < 1 || output_length < 1 || hidden < 1)
        throw std::domain_error("network dimensions must be positive");
    MlpParams p;
    p.dims = dims;
    p.input_length = input_length;
    p.output_length = output_length;
    p.w1 = Matrix::Zero(hidden, dims * input_length);
    p.b1 = Vector::Zero(hidden);
    p.w2 = Matrix::Zero(dims * output_length, hidden);
    p.b2 = Vector::Zero(dims * output_length);
    return p;
}

void MlpParams::validate() const {
    const auto h = w1.rows();
    if (w1.cols() != dims * input_length || b1.size() != h || w2.rows() != dims * output_length ||
        w2.cols() != h || b2.size() != dims * output_length)
        throw std::domain_error("inconsistent network parameter shapes");
    if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite())
        throw std::domain_error("non-finite network parameters");
}

Vector MlpParams::flatten() const {
    Vector out(parameter_count());
    out << Eigen::Map<const Vector>(w1.data(), w1.size()), b1,
        Eigen::Map<const Vector>(w2.data(), w2.size()), b2;
    return out;
}

void MlpParams::assign(const Vector& flat) {
    if (flat.size() != parameter_count()) throw std::domain_error("parameter vector has the wrong size");
    Eigen::Index k = 0;
    auto take = [&](auto& block) {
        Eigen::Map<Vector>(block.data(), block.size()) = flat.segment(k, block.size());
        k += block.size();
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
}

MlpParams init_mlp(Eigen::Index dims, Eigen::Index input_length, Eigen::Index output_length,
                   Eigen::Index hidden, std::uint64_t seed) {
    auto p = MlpParams::zeros(dims, input_length, output_length, hidden);
    auto rng = substream(seed, "mlp-init");
    std::normal_distribution<double> w1_dist(0.0, 1.0 / std::sqrt(static_cast<double>(p.w1.cols())));
    std::normal_distribution<double> w2_dist(0.0, 1.0 / std::sqrt(static_cast<double>(hidden)));
    for (Eigen::Index k = 0; k < p.w1.size(); ++k) p.w1(k) = w1_dist(rng);
    for (Eigen::Index k = 0; k < p.w2.size(); ++k) p.w2(k) = w2_dist(rng);
    return p;
}

PredictionPair split_series(const TimeSeries& x, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::domain_error("fraction must lie in (0, 1)");
    const auto n = x.length();
    const auto t = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n)));
    if (t < 1 || t >= n) throw std::domain_error("split leaves an empty input or target segment");
    return {x.segment(0, t), x.segment(t, n - t)};
}

PredictionTask make_prediction_task(std::span<const TimeSeries> series, double fraction) {
    PredictionTask task;
    task.input_fraction = fraction;
    for (const auto& s : series) task.pairs.push_back(split_series(s, fraction));
    return task;
}

TimeSeries mlp_forward(const MlpParams& params, const TimeSeries& input) {
    check_input(params, input);
    const Vector out = forward(params, input).output;
    return TimeSeries(Matrix(Eigen::Map<const Matrix>(out.data(), params.dims, params.output_length)));
}

double training_loss(const MlpParams& params, std::span<const PredictionPair> batch, LossMode mode,
                     unsigned threads) {
    check_batch(params, batch);
    std::vector<double> losses(batch.size());
    parallel_for(batch.size(), threads, [&](std::size_t k) {
        losses[k] = pair_loss(mlp_forward(params, batch[k].input), batch[k].target, mode);
    });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(batch.size());
}

MlpParams training_grad(const MlpParams& params, std::span<const PredictionPair> batch, LossMode mode,
                        unsigned threads) {
    check_batch(params, batch);
    if (mode.kind == LossMode::Kind::soft_dtw && mode.gamma.hard())
        throw std::invalid_argument("soft-DTW training loss needs gamma > 0");

    std::vector<MlpParams> grads(batch.size());
    parallel_for(batch.size(), threads, [&](std::size_t k) {
        const auto act = forward(params, batch[k].input);
        const TimeSeries prediction(
            Matrix(Eigen::Map<const Matrix>(act.output.data(), params.dims, params.output_length)));
        Vector d_out;
        if (mode.kind == LossMode::Kind::euclidean) {
            d_out = 2.0 * (act.output - flatten_series(batch[k].target));
        } else {
            const Matrix g = sdtw_value_and_grad(prediction, batch[k].target, mode.gamma).gradient;
            d_out = Eigen::Map<const Vector>(g.data(), g.size());
        }
        MlpParams& gk = grads[k];
        gk.dims = params.dims;
        gk.input_length = params.input_length;
        gk.output_length = params.output_length;
        gk.w2 = d_out * act.hidden.transpose();
        gk.b2 = d_out;
        const Vector d_hidden =
            (params.w2.transpose() * d_out).array() * act.hidden.array() * (1.0 - act.hidden.array());
        gk.w1 = d_hidden * act.input.transpose();
        gk.b1 = d_hidden;
    });

    MlpParams total = MlpParams::zeros(params.dims, params.input_length, params.output_length,
                                       params.hidden());
    for (const auto& g : grads) {
        total.w1 += g.w1;
        total.b1 += g.b1;
        total.w2 += g.w2;
        total.b2 += g.b2;
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    total.w1 *= scale;
    total.b1 *= scale;
    total.w2 *= scale;
    total.b2 *= scale;
    return total;
}

AdamState AdamState::for_params(const MlpParams& params, double learning_rate) {
    AdamState s;
    s.first_moment = Vector::Zero(params.parameter_count());
    s.second_moment = Vector::Zero(params.parameter_count());
    s.learning_rate = learning_rate;
    return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& gradient) {
    const Vector g = gradient.flatten();
    if (g.size() != params.parameter_count() || state.first_moment.size() != g.size() ||
        state.second_moment.size() != g.size())
        throw std::domain_error("adam: gradient and state shapes do not match the parameters");
    if (!(state.beta1 >= 0.0 && state.beta1 < 1.0 && state.beta2 >= 0.0 && state.beta2 < 1.0))
        throw std::domain_error("adam: decay rates must lie in [0, 1)");

    ++state.step;
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * g;
    state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const Vector m_hat = state.first_moment / c1;
    const Vector v_hat = state.second_moment / c2;
    Vector theta = params.flatten();
    theta.array() -= state.learning_rate * m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
    params.assign(theta);
}

namespace {

// Runs `epochs` epochs of shuffled mini-batch Adam; appends per-epoch losses.
bool run_epochs(MlpParams& params, std::span<const PredictionPair> pairs, LossMode mode, int epochs,
                const TrainConfig& config, std::mt19937_64& rng, std::vector<double>& history) {
    AdamState adam = AdamState::for_params(params, config.learning_rate);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    const auto batch_size = static_cast<std::size_t>(std::max(1, config.batch_size));
    std::vector<PredictionPair> batch;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            batch.clear();
            for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k)
                batch.push_back(pairs[order[k]]);
            const MlpParams grad = training_grad(params, batch, mode, config.threads);
            if (!grad.flatten().allFinite()) return false;
            adam_step(adam, params, grad);
        }
        const double loss = training_loss(params, pairs, mode, config.threads);
        history.push_back(loss);
        if (!std::isfinite(loss)) return false;
    }
    return true;
}

}  // namespace

TrainResult train_predictor(std::span<const PredictionPair> pairs, const TrainConfig& config) {
    if (pairs.empty()) throw std::domain_error("no training pairs");
    if (config.epochs < 0) throw std::domain_error("epochs must be nonnegative");
    const auto& first = pairs.front();
    TrainResult out;
    out.params = init_mlp(first.input.dims(), first.input.length(), first.target.length(), config.hidden,
                          config.seed);
    check_batch(out.params, pairs);
    auto rng = substream(config.seed, "mlp-shuffle");

    if (config.init == PredictorInit::euclidean_warm_start) {
        const int warm = config.warm_start_epochs > 0 ? config.warm_start_epochs : config.epochs;
        if (!run_epochs(out.params, pairs, LossMode::euclidean(), warm, config, rng, out.warm_start_history)) {
            out.aborted = true;
            return out;
        }
    }
    out.aborted = !run_epochs(out.params, pairs, config.mode, config.epochs, config, rng, out.history);
    return out;
}

PredictionScores evaluate_predictor(const MlpParams& params, std::span<const PredictionPair> pairs) {
    if (pairs.empty()) throw std::domain_error("no evaluation pairs");
    PredictionScores s;
    for (const auto& pair : pairs) {
        const auto prediction = mlp_forward(params, pair.input);
        s.dtw += dtw(prediction, pair.target);
        s.euclidean += (prediction.values() - pair.target.values()).squaredNorm();
    }
    s.dtw /= static_cast<double>(pairs.size());
    s.euclidean /= static_cast<double>(pairs.size());
    return s;
}

void save_mlp(const std::filesystem::path& path, const MlpParams& params, const nlohmann::json& metadata) {
    params.validate();
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out.write(kMagic, sizeof kMagic);
        write_le<std::uint32_t>(out, kFormatVersion);
        write_le<std::uint32_t>(out, 0);
        for (auto v : {params.dims, params.input_length, params.output_length, params.hidden()})
            write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v));
        write_row_major(out, params.w1);
        for (double v : params.b1) write_le(out, v);
        write_row_major(out, params.w2);
        for (double v : params.b2) write_le(out, v);
        if (!out) throw std::runtime_error("write failed for " + path.string());
    }
    nlohmann::json meta = metadata;
    meta["format"] = "softdtw-mlp";
    meta["version"] = kFormatVersion;
    meta["dims"] = params.dims;
    meta["input_length"] = params.input_length;
    meta["output_length"] = params.output_length;
    meta["hidden"] = params.hidden();
    meta["activation"] = "sigmoid";
    meta["flatten_order"] = "time-major";
    std::ofstream side(sidecar(path));
    if (!side) throw std::runtime_error("cannot write " + sidecar(path).string());
    side << meta.dump(2) << '\n';
}

MlpParams load_mlp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(path.string() + " is not a model file");
    const auto version = read_le<std::uint32_t>(in);
    if (version != kFormatVersion)
        throw std::runtime_error("unsupported model format version " + std::to_string(version));
    read_le<std::uint32_t>(in);
    Eigen::Index dims[4];
    for (auto& d : dims) {
        const auto v = read_le<std::uint64_t>(in);
        if (v == 0 || v > (1u << 24)) throw std::runtime_error("implausible model dimension");
        d = static_cast<Eigen::Index>(v);
    }
    auto p = MlpParams::zeros(dims[0], dims[1], dims[2], dims[3]);
    read_row_major(in, p.w1);
    for (auto& v : p.b1) v = read_le<double>(in);
    read_row_major(in, p.w2);
    for (auto& v : p.b2) v = read_le<double>(in);
    if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in model file");
    p.validate();
    return p;
}

nlohmann::json load_mlp_metadata(const std::filesystem::path& path) {
    std::ifstream in(sidecar(path));
    if (!in) throw std::runtime_error("cannot open " + sidecar(path).string());
    return nlohmann::json::parse(in);
}

}  // namespace softdtw
