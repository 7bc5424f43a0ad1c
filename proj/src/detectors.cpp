#include "nadsim/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nadsim {

std::optional<DetectorKind> detector_kind_from_string(const std::string& name) {
    if (name == "autoencoder") return DetectorKind::Autoencoder;
    if (name == "mean_shift") return DetectorKind::MeanShift;
    if (name == "isolation_forest") return DetectorKind::IsolationForest;
    if (name == "hbos") return DetectorKind::Hbos;
    return std::nullopt;
}

const char* detector_kind_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::Autoencoder: return "autoencoder";
        case DetectorKind::MeanShift: return "mean_shift";
        case DetectorKind::IsolationForest: return "isolation_forest";
        default: return "hbos";
    }
}

FeatureVec window_features(const MetricWindow& w) {
    return {w.bandwidth_bps, w.avg_frame_size, w.avg_frame_gap_ns, w.avg_cycle_jitter_ns};
}

std::vector<double> Normalization::apply(const FeatureVec& f) const {
    std::vector<double> out;
    for (int i = 0; i < kFeatureCount; ++i)
        if (active[i]) out.push_back((f[i] - lo[i]) / (hi[i] - lo[i]));
    return out;
}

namespace {

const char* kFeatureNames[kFeatureCount] = {"bandwidth", "avg_frame_size", "avg_frame_gap",
                                            "avg_cycle_jitter"};

Normalization learn_normalization(const std::vector<MetricWindow>& training) {
    Normalization n;
    for (int i = 0; i < kFeatureCount; ++i) {
        n.lo[i] = std::numeric_limits<double>::infinity();
        n.hi[i] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& w : training) {
        FeatureVec f = window_features(w);
        for (int i = 0; i < kFeatureCount; ++i) {
            n.lo[i] = std::min(n.lo[i], f[i]);
            n.hi[i] = std::max(n.hi[i], f[i]);
        }
    }
    for (int i = 0; i < kFeatureCount; ++i) {
        n.active[i] = n.hi[i] > n.lo[i];
        if (!n.active[i])
            n.warnings.push_back(std::string("feature ") + kFeatureNames[i] +
                                 " is degenerate in training data; excluded");
    }
    return n;
}

double quantile_threshold(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    if (values.empty()) return 0;
    size_t idx = (size_t)std::ceil(q * (double)values.size());
    if (idx > 0) --idx;
    if (idx >= values.size()) idx = values.size() - 1;
    return values[idx];
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace

// ---- autoencoder ----

constexpr int AutoencoderNet::kSizes[];

int AutoencoderNet::param_count() {
    int n = 0;
    for (int l = 0; l < kLayers; ++l) n += kSizes[l + 1] * kSizes[l] + kSizes[l + 1];
    return n;
}

void AutoencoderNet::init(Rng& rng) {
    params.resize(param_count());
    size_t p = 0;
    for (int l = 0; l < kLayers; ++l) {
        double r = std::sqrt(6.0 / (kSizes[l] + kSizes[l + 1]));
        for (int i = 0; i < kSizes[l + 1] * kSizes[l]; ++i) params[p++] = rng.uniform(-r, r);
        for (int i = 0; i < kSizes[l + 1]; ++i) params[p++] = 0.0;
    }
}

namespace {

struct AeForward {
    // activations per layer boundary; act[0] = input, act[4] = output
    std::vector<double> act[AutoencoderNet::kLayers + 1];
    std::vector<double> pre[AutoencoderNet::kLayers + 1];  // pre-activation
};

void ae_forward(const AutoencoderNet& net, const std::vector<double>& x, AeForward& f) {
    f.act[0] = x;
    f.act[0].resize(AutoencoderNet::kSizes[0], 0.0);
    size_t p = 0;
    for (int l = 0; l < AutoencoderNet::kLayers; ++l) {
        int in = AutoencoderNet::kSizes[l];
        int out = AutoencoderNet::kSizes[l + 1];
        f.pre[l + 1].assign(out, 0.0);
        for (int o = 0; o < out; ++o) {
            double z = 0;
            for (int i = 0; i < in; ++i) z += net.params[p + (size_t)o * in + i] * f.act[l][i];
            f.pre[l + 1][o] = z;
        }
        p += (size_t)out * in;
        for (int o = 0; o < out; ++o) f.pre[l + 1][o] += net.params[p + o];
        p += out;
        f.act[l + 1] = f.pre[l + 1];
        if (l + 1 < AutoencoderNet::kLayers)  // rectifier on hidden and code layers
            for (double& v : f.act[l + 1]) v = std::max(0.0, v);
    }
}

}  // namespace

double AutoencoderNet::loss(const std::vector<double>& x) const {
    AeForward f;
    ae_forward(*this, x, f);
    double s = 0;
    for (int i = 0; i < kSizes[kLayers]; ++i) {
        double d = f.act[kLayers][i] - f.act[0][i];
        s += d * d;
    }
    return s;
}

std::vector<double> AutoencoderNet::gradient(const std::vector<double>& x) const {
    AeForward f;
    ae_forward(*this, x, f);
    std::vector<double> grad(params.size(), 0.0);

    std::vector<double> delta(kSizes[kLayers]);
    for (int i = 0; i < kSizes[kLayers]; ++i)
        delta[i] = 2.0 * (f.act[kLayers][i] - f.act[0][i]);

    // walk layers backwards; p points at the start of layer l's weights
    size_t layer_start[kLayers];
    size_t p = 0;
    for (int l = 0; l < kLayers; ++l) {
        layer_start[l] = p;
        p += (size_t)kSizes[l + 1] * kSizes[l] + kSizes[l + 1];
    }
    for (int l = kLayers - 1; l >= 0; --l) {
        int in = kSizes[l];
        int out = kSizes[l + 1];
        size_t wp = layer_start[l];
        size_t bp = wp + (size_t)out * in;
        for (int o = 0; o < out; ++o) {
            for (int i = 0; i < in; ++i) grad[wp + (size_t)o * in + i] = delta[o] * f.act[l][i];
            grad[bp + o] = delta[o];
        }
        if (l > 0) {
            std::vector<double> prev(in, 0.0);
            for (int i = 0; i < in; ++i) {
                double s = 0;
                for (int o = 0; o < out; ++o) s += params[wp + (size_t)o * in + i] * delta[o];
                // derivative of the rectifier at layer l's pre-activation
                prev[i] = f.pre[l][i] > 0 ? s : 0.0;
            }
            delta = std::move(prev);
        }
    }
    return grad;
}

void AutoencoderNet::sgd_step(const std::vector<double>& x, double lr) {
    std::vector<double> g = gradient(x);
    for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * g[i];
}

// ---- isolation forest ----

double iso_c(int64_t n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    double h = std::log((double)(n - 1)) + 0.5772156649015329;
    return 2.0 * h - 2.0 * (double)(n - 1) / (double)n;
}

namespace {

int build_iso_tree(std::vector<IsoNode>& tree, std::vector<std::vector<double>>& data,
                   int lo, int hi, int depth, int limit, Rng& rng) {
    int idx = (int)tree.size();
    tree.push_back({});
    int n = hi - lo;
    if (n <= 1 || depth >= limit) {
        tree[idx].size = n;
        return idx;
    }
    int dims = (int)data[lo].size();
    // candidate features with spread in this node
    std::vector<int> usable;
    for (int d = 0; d < dims; ++d) {
        double mn = data[lo][d], mx = data[lo][d];
        for (int i = lo + 1; i < hi; ++i) {
            mn = std::min(mn, data[i][d]);
            mx = std::max(mx, data[i][d]);
        }
        if (mx > mn) usable.push_back(d);
    }
    if (usable.empty()) {
        tree[idx].size = n;
        return idx;
    }
    int d = usable[(size_t)rng.next_below(usable.size())];
    double mn = data[lo][d], mx = data[lo][d];
    for (int i = lo + 1; i < hi; ++i) {
        mn = std::min(mn, data[i][d]);
        mx = std::max(mx, data[i][d]);
    }
    double split = rng.uniform(mn, mx);
    int mid = lo;
    for (int i = lo; i < hi; ++i)
        if (data[i][d] < split) std::swap(data[i], data[mid++]);
    if (mid == lo || mid == hi) {
        tree[idx].size = n;
        return idx;
    }
    tree[idx].feature = d;
    tree[idx].split = split;
    tree[idx].left = build_iso_tree(tree, data, lo, mid, depth + 1, limit, rng);
    tree[idx].right = build_iso_tree(tree, data, mid, hi, depth + 1, limit, rng);
    return idx;
}

double iso_path_length(const std::vector<IsoNode>& tree, const std::vector<double>& x) {
    int idx = 0;
    double depth = 0;
    while (tree[idx].feature >= 0) {
        idx = x[tree[idx].feature] < tree[idx].split ? tree[idx].left : tree[idx].right;
        depth += 1;
    }
    return depth + iso_c(tree[idx].size);
}

}  // namespace

// ---- scoring ----

double detector_score(const DetectorModel& model, const MetricWindow& w) {
    std::vector<double> x = model.norm.apply(window_features(w));
    switch (model.kind) {
        case DetectorKind::Autoencoder:
            return model.net.loss(x);
        case DetectorKind::MeanShift: {
            // distance to the nearest centroid in units of its scaled radius;
            // <= 1 means inside some cluster
            double best = std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < model.centroids.size(); ++c) {
                double dist = std::sqrt(sq_dist(x, model.centroids[c]));
                double radius = model.radii[c] * model.params.radius_scale;
                double rel = radius > 0 ? dist / radius
                                        : (dist == 0 ? 0.0
                                                     : std::numeric_limits<double>::infinity());
                best = std::min(best, rel);
            }
            return best;
        }
        case DetectorKind::IsolationForest: {
            double sum = 0;
            for (const auto& tree : model.forest) sum += iso_path_length(tree, x);
            double avg = sum / (double)model.forest.size();
            return std::pow(2.0, -avg / iso_c(model.subsample));
        }
        case DetectorKind::Hbos: {
            double score = 0;
            for (size_t d = 0; d < model.bin_density.size(); ++d) {
                double v = x[d];
                double density;
                int b = (int)std::floor((v - model.bin_lo[d]) / model.bin_width[d]);
                int nbins = (int)model.bin_density[d].size();
                if (v < model.bin_lo[d] || b >= nbins) {
                    density = model.fallback_density[d];
                } else {
                    if (b < 0) b = 0;
                    density = model.bin_density[d][b];
                    if (density <= 0) density = model.fallback_density[d];
                }
                score += std::log(1.0 / density);
            }
            return score;
        }
    }
    return 0;
}

DetectorModel train_detector(DetectorKind kind, const std::vector<MetricWindow>& training,
                             const DetectorParams& params, uint64_t seed) {
    if (training.size() < 10)
        throw DetectorError("need at least 10 training windows, got " +
                            std::to_string(training.size()));
    DetectorModel model;
    model.kind = kind;
    model.params = params;
    model.norm = learn_normalization(training);
    if (model.norm.active_count() == 0)
        throw DetectorError("all features degenerate in training data");

    std::vector<std::vector<double>> data;
    data.reserve(training.size());
    for (const auto& w : training) data.push_back(model.norm.apply(window_features(w)));
    const size_t n = data.size();

    switch (kind) {
        case DetectorKind::Autoencoder: {
            Rng rng = Rng::substream(seed, "autoencoder");
            model.net.init(rng);
            std::vector<size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            // inputs are zero-padded to the input width when features were
            // excluded; Normalization::apply already dropped them
            for (int epoch = 0; epoch < params.epochs; ++epoch) {
                for (size_t i = n - 1; i > 0; --i)
                    std::swap(order[i], order[rng.next_below(i + 1)]);
                for (size_t i : order) model.net.sgd_step(data[i], params.learning_rate);
            }
            std::vector<double> errors;
            errors.reserve(n);
            for (const auto& x : data) errors.push_back(model.net.loss(x));
            model.threshold = quantile_threshold(errors, params.threshold_quantile);
            break;
        }
        case DetectorKind::MeanShift: {
            double h = params.bandwidth;
            if (h <= 0) {
                std::vector<double> dists;
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = i + 1; j < n; ++j)
                        dists.push_back(std::sqrt(sq_dist(data[i], data[j])));
                std::sort(dists.begin(), dists.end());
                h = dists.empty() ? 1.0
                                  : (dists.size() % 2 ? dists[dists.size() / 2]
                                                      : 0.5 * (dists[dists.size() / 2 - 1] +
                                                               dists[dists.size() / 2]));
                if (h <= 0) h = 1.0;
            }
            model.bandwidth = h;

            // flat-kernel mean shift from every training point
            std::vector<std::vector<double>> modes;
            std::vector<int> assignment(n, -1);
            for (size_t i = 0; i < n; ++i) {
                std::vector<double> m = data[i];
                for (int iter = 0; iter < 200; ++iter) {
                    std::vector<double> next(m.size(), 0.0);
                    int count = 0;
                    for (const auto& p : data)
                        if (sq_dist(m, p) <= h * h) {
                            for (size_t d = 0; d < m.size(); ++d) next[d] += p[d];
                            ++count;
                        }
                    for (double& v : next) v /= (double)count;
                    if (sq_dist(next, m) < 1e-14) {
                        m = next;
                        break;
                    }
                    m = std::move(next);
                }
                // merge modes closer than half the bandwidth
                int found = -1;
                for (size_t c = 0; c < modes.size(); ++c)
                    if (sq_dist(m, modes[c]) <= (h / 2) * (h / 2)) {
                        found = (int)c;
                        break;
                    }
                if (found < 0) {
                    found = (int)modes.size();
                    modes.push_back(m);
                }
                assignment[i] = found;
            }
            // centroid = member mean; radius = max member distance
            model.centroids.assign(modes.size(),
                                   std::vector<double>(data[0].size(), 0.0));
            std::vector<int> counts(modes.size(), 0);
            for (size_t i = 0; i < n; ++i) {
                for (size_t d = 0; d < data[i].size(); ++d)
                    model.centroids[assignment[i]][d] += data[i][d];
                counts[assignment[i]]++;
            }
            for (size_t c = 0; c < modes.size(); ++c)
                for (double& v : model.centroids[c]) v /= (double)counts[c];
            model.radii.assign(modes.size(), 0.0);
            for (size_t i = 0; i < n; ++i)
                model.radii[assignment[i]] =
                    std::max(model.radii[assignment[i]],
                             std::sqrt(sq_dist(data[i], model.centroids[assignment[i]])));
            model.threshold = 1.0;  // relative distance > 1 means outside all clusters
            break;
        }
        case DetectorKind::IsolationForest: {
            Rng rng = Rng::substream(seed, "isolation-forest");
            model.subsample = (int)std::min<size_t>((size_t)params.max_samples, n);
            std::vector<size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            int limit = (int)std::ceil(std::log2((double)std::max(2, model.subsample)));
            for (int t = 0; t < params.trees; ++t) {
                for (size_t i = n - 1; i > 0; --i)
                    std::swap(idx[i], idx[rng.next_below(i + 1)]);
                std::vector<std::vector<double>> sample;
                sample.reserve(model.subsample);
                for (int i = 0; i < model.subsample; ++i) sample.push_back(data[idx[i]]);
                std::vector<IsoNode> tree;
                build_iso_tree(tree, sample, 0, (int)sample.size(), 0, limit, rng);
                model.forest.push_back(std::move(tree));
            }
            std::vector<double> scores;
            scores.reserve(n);
            for (const auto& w : training) scores.push_back(detector_score(model, w));
            model.threshold = quantile_threshold(scores, 1.0 - params.contamination);
            break;
        }
        case DetectorKind::Hbos: {
            int dims = model.norm.active_count();
            model.bin_density.resize(dims);
            model.bin_lo.resize(dims);
            model.bin_width.resize(dims);
            model.fallback_density.resize(dims);
            for (int d = 0; d < dims; ++d) {
                double lo = data[0][d], hi = data[0][d];
                for (const auto& x : data) {
                    lo = std::min(lo, x[d]);
                    hi = std::max(hi, x[d]);
                }
                double width = (hi - lo) / params.bins;
                if (width <= 0) width = 1.0;
                model.bin_lo[d] = lo;
                model.bin_width[d] = width;
                std::vector<int64_t> counts(params.bins, 0);
                for (const auto& x : data) {
                    int b = (int)std::floor((x[d] - lo) / width);
                    if (b >= params.bins) b = params.bins - 1;  // hi boundary
                    if (b < 0) b = 0;
                    counts[b]++;
                }
                int64_t max_count = *std::max_element(counts.begin(), counts.end());
                int64_t min_nonzero = max_count;
                for (int64_t c : counts)
                    if (c > 0) min_nonzero = std::min(min_nonzero, c);
                model.bin_density[d].resize(params.bins);
                for (int b = 0; b < params.bins; ++b)
                    model.bin_density[d][b] = (double)counts[b] / (double)max_count;
                // out-of-range and empty bins: half the smallest seen height
                model.fallback_density[d] = 0.5 * (double)min_nonzero / (double)max_count;
            }
            std::vector<double> scores;
            scores.reserve(n);
            for (const auto& w : training) scores.push_back(detector_score(model, w));
            model.threshold = quantile_threshold(scores, 1.0 - params.contamination);
            break;
        }
    }
    return model;
}

std::vector<bool> score_windows(const DetectorModel& model,
                                const std::vector<MetricWindow>& windows) {
    std::vector<bool> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(detector_score(model, w) > model.threshold);
    return out;
}

EvalReport evaluate(const std::vector<bool>& predictions, const std::vector<bool>& truth) {
    if (predictions.size() != truth.size())
        throw DetectorError("prediction and truth lengths differ");
    EvalReport r;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (truth[i] && predictions[i]) r.tp++;
        else if (!truth[i] && predictions[i]) r.fp++;
        else if (truth[i] && !predictions[i]) r.fn++;
        else r.tn++;
    }
    if (r.tp + r.fp > 0) r.precision = (double)r.tp / (double)(r.tp + r.fp);
    if (r.tp + r.fn > 0) r.recall = (double)r.tp / (double)(r.tp + r.fn);
    return r;
}

std::string serialize_eval(const EvalReport& r) {
    std::ostringstream out;
    out << "tp,fp,tn,fn,precision,recall\n"
        << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ',';
    if (r.precision) out << *r.precision;
    out << ',';
    if (r.recall) out << *r.recall;
    out << '\n';
    return out.str();
}

std::string serialize_trace(const std::vector<MetricWindow>& windows,
                            const std::vector<bool>& predictions) {
    std::ostringstream out;
    out << "start_ns,real_length_ns,bandwidth_bps,avg_frame_size,avg_frame_gap_ns,"
           "avg_cycle_jitter_ns,packet_count,truth,prediction\n";
    for (size_t i = 0; i < windows.size(); ++i) {
        const MetricWindow& w = windows[i];
        out << w.start << ',' << w.real_length << ',' << w.bandwidth_bps << ','
            << w.avg_frame_size << ',' << w.avg_frame_gap_ns << ',' << w.avg_cycle_jitter_ns
            << ',' << w.packet_count << ',' << (w.abnormal ? "abnormal" : "benign") << ','
            << (i < predictions.size() && predictions[i] ? "abnormal" : "benign") << '\n';
    }
    return out.str();
}

}  // namespace nadsim
