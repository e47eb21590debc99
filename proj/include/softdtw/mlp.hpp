#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "softdtw/soft_dtw.hpp"

namespace softdtw {

// One-hidden-layer perceptron mapping a p x t input segment to a p x (n - t)
// output segment: out = w2 * sigmoid(w1 * flatten(in) + b1) + b2.
// Segments are flattened time-major (column-major): all p features of step 1,
// then step 2, and so on.
struct MlpParams {
    Eigen::Index dims = 1;
    Eigen::Index input_length = 1;
    Eigen::Index output_length = 1;
    Matrix w1;  // hidden x (dims * input_length)
    Vector b1;  // hidden
    Matrix w2;  // (dims * output_length) x hidden
    Vector b2;  // dims * output_length

    static MlpParams zeros(Eigen::Index dims, Eigen::Index input_length, Eigen::Index output_length,
                           Eigen::Index hidden);

    Eigen::Index hidden() const { return w1.rows(); }
    Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
    // Throws if shapes disagree or any entry is non-finite.
    void validate() const;

    // All parameters as one vector (w1, b1, w2, b2; matrices column-major).
    Vector flatten() const;
    void assign(const Vector& flat);

    friend bool operator==(const MlpParams& a, const MlpParams& b) {
        return a.dims == b.dims && a.input_length == b.input_length &&
               a.output_length == b.output_length && a.hidden() == b.hidden() &&
               a.flatten() == b.flatten();
    }
};

// Gaussian weights with variance 1 / fan_in, zero biases.
MlpParams init_mlp(Eigen::Index dims, Eigen::Index input_length, Eigen::Index output_length,
                   Eigen::Index hidden, std::uint64_t seed);

struct PredictionPair {
    TimeSeries input;
    TimeSeries target;
};

// First t = floor(fraction * n) steps as input, the rest as target.
PredictionPair split_series(const TimeSeries& x, double fraction);

struct PredictionTask {
    double input_fraction = 0.6;
    std::vector<PredictionPair> pairs;
};

PredictionTask make_prediction_task(std::span<const TimeSeries> series, double fraction);

struct LossMode {
    enum class Kind { euclidean, soft_dtw };
    Kind kind = Kind::euclidean;
    Gamma gamma;

    static LossMode euclidean() { return {}; }
    static LossMode soft_dtw(double gamma) { return {Kind::soft_dtw, Gamma{gamma}}; }
};

TimeSeries mlp_forward(const MlpParams& params, const TimeSeries& input);

// Mean over the batch of ||prediction - target||^2 or sdtw_gamma(prediction, target).
double training_loss(const MlpParams& params, std::span<const PredictionPair> batch, LossMode mode,
                     unsigned threads = 1);

// Gradient of training_loss with respect to every parameter.
MlpParams training_grad(const MlpParams& params, std::span<const PredictionPair> batch, LossMode mode,
                        unsigned threads = 1);

struct AdamState {
    long step = 0;
    Vector first_moment;
    Vector second_moment;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_params(const MlpParams& params, double learning_rate = 1e-3);
};

// One bias-corrected Adam update of params in place.
void adam_step(AdamState& state, MlpParams& params, const MlpParams& gradient);

enum class PredictorInit { random, euclidean_warm_start };

struct TrainConfig {
    LossMode mode;
    int epochs = 200;
    int batch_size = 16;
    double learning_rate = 1e-3;
    Eigen::Index hidden = 64;
    std::uint64_t seed = 0;
    PredictorInit init = PredictorInit::random;
    // Euclidean epochs run before the main phase for euclidean_warm_start;
    // 0 means the same as `epochs`.
    int warm_start_epochs = 0;
    unsigned threads = 1;
};

struct TrainResult {
    MlpParams params;
    // Training loss (in the training mode) after each epoch of the main phase.
    std::vector<double> history;
    std::vector<double> warm_start_history;
    bool aborted = false;  // a non-finite loss stopped training
};

TrainResult train_predictor(std::span<const PredictionPair> pairs, const TrainConfig& config);

struct PredictionScores {
    double dtw = 0.0;        // mean DTW (gamma = 0)
    double euclidean = 0.0;  // mean squared Euclidean distance
};

PredictionScores evaluate_predictor(const MlpParams& params, std::span<const PredictionPair> pairs);

// Binary container: 8-byte magic "SDTWMLP\0", u32 version, u32 reserved,
// u64 dims, input_length, output_length, hidden, then w1, b1, w2, b2 as
// little-endian doubles with matrices in row-major order. The metadata is
// written next to it as <path>.json.
void save_mlp(const std::filesystem::path& path, const MlpParams& params,
              const nlohmann::json& metadata = nlohmann::json::object());
MlpParams load_mlp(const std::filesystem::path& path);
nlohmann::json load_mlp_metadata(const std::filesystem::path& path);

}  // namespace softdtw
