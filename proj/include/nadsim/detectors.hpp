#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nadsim/metrics.hpp"
#include "nadsim/rng.hpp"

namespace nadsim {

struct DetectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DetectorKind { Autoencoder, MeanShift, IsolationForest, Hbos };

std::optional<DetectorKind> detector_kind_from_string(const std::string& name);
const char* detector_kind_name(DetectorKind kind);

struct DetectorParams {
    // autoencoder
    double learning_rate = 1e-3;
    int epochs = 3;
    double threshold_quantile = 0.99;
    // mean-shift
    double bandwidth = 0.0;  // 0 = median pairwise-distance heuristic
    double radius_scale = 1.1;
    // isolation forest
    int trees = 100;
    int max_samples = 256;
    double contamination = 0.1;
    // hbos
    int bins = 10;
};

inline constexpr int kFeatureCount = 4;
using FeatureVec = std::array<double, kFeatureCount>;

FeatureVec window_features(const MetricWindow& w);

// Per-feature min-max scaling learned from training data. Degenerate
// features (zero range) are excluded from every detector with a warning.
struct Normalization {
    std::array<double, kFeatureCount> lo{}, hi{};
    std::array<bool, kFeatureCount> active{};
    std::vector<std::string> warnings;

    int active_count() const {
        int n = 0;
        for (bool a : active) n += a;
        return n;
    }
    // Projects onto the active features, scaled; no clamping so that
    // out-of-range test values stay visible as anomaly signal.
    std::vector<double> apply(const FeatureVec& f) const;
};

// Fully connected 4-32-4-32-4 autoencoder, rectifier hidden/code layers,
// linear output, squared-error loss. Exposed for gradient verification.
struct AutoencoderNet {
    static constexpr int kLayers = 4;
    static constexpr int kSizes[kLayers + 1] = {4, 32, 4, 32, 4};

    std::vector<double> params;  // weights then bias per layer, in order

    static int param_count();
    void init(Rng& rng);
    // Reconstruction loss sum((out - x)^2) for a single input.
    double loss(const std::vector<double>& x) const;
    // Analytic gradient of loss w.r.t. every parameter.
    std::vector<double> gradient(const std::vector<double>& x) const;
    void sgd_step(const std::vector<double>& x, double lr);
};

struct IsoNode {
    int feature = -1;   // -1: leaf
    double split = 0;
    int left = -1, right = -1;
    int size = 0;       // leaf population
};

struct DetectorModel {
    DetectorKind kind = DetectorKind::MeanShift;
    DetectorParams params;
    Normalization norm;
    double threshold = 0;

    // autoencoder
    AutoencoderNet net;

    // mean-shift
    std::vector<std::vector<double>> centroids;
    std::vector<double> radii;
    double bandwidth = 0;

    // isolation forest
    std::vector<std::vector<IsoNode>> forest;
    int subsample = 0;

    // hbos: per active dimension, normalized bin heights over training range
    std::vector<std::vector<double>> bin_density;
    std::vector<double> bin_lo, bin_width, fallback_density;
};

// Raw anomaly score of one window under the model (reconstruction error,
// distance beyond nearest radius, isolation score, or HBOS log score).
double detector_score(const DetectorModel& model, const MetricWindow& w);

DetectorModel train_detector(DetectorKind kind, const std::vector<MetricWindow>& training,
                             const DetectorParams& params, uint64_t seed);

// true = abnormal
std::vector<bool> score_windows(const DetectorModel& model,
                                const std::vector<MetricWindow>& windows);

struct EvalReport {
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> precision;  // absent when TP+FP == 0
    std::optional<double> recall;     // absent when TP+FN == 0
};

EvalReport evaluate(const std::vector<bool>& predictions, const std::vector<bool>& truth);

std::string serialize_eval(const EvalReport& report);

// Per-window inspection trace: start, real_length, features, truth, prediction.
std::string serialize_trace(const std::vector<MetricWindow>& windows,
                            const std::vector<bool>& predictions);

// Average unsuccessful-search path length of a binary search tree with n
// nodes; the isolation-forest normalization constant.
double iso_c(int64_t n);

}  // namespace nadsim
