#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nadsim/detectors.hpp"
#include "nadsim/manifest.hpp"
#include "nadsim/metrics.hpp"
#include "nadsim/pcapng.hpp"
#include "nadsim/sim.hpp"

namespace fs = std::filesystem;
using namespace nadsim;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

StreamFilter parse_filter(const std::string& expr) {
    StreamFilter f;
    size_t pos = 0;
    while (pos < expr.size()) {
        size_t comma = expr.find(',', pos);
        std::string term = expr.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? expr.size() : comma + 1;
        if (term.empty()) continue;
        size_t eq = term.find('=');
        if (eq == std::string::npos)
            throw UsageError("filter term '" + term + "' is not key=value");
        std::string key = term.substr(0, eq);
        std::string value = term.substr(eq + 1);
        try {
            if (key == "iface") {
                f.iface = value;
            } else if (key == "vlan") {
                f.vlan = std::stoi(value);
            } else if (key == "pcp") {
                f.pcp = std::stoi(value);
            } else if (key == "dmac") {
                if (!mac_from_string(value))
                    throw UsageError("filter dmac '" + value + "' is not aa:bb:cc:dd:ee:ff");
                f.dst_mac = value;
            } else if (key == "udp_dst") {
                int v = std::stoi(value);
                if (v < 0 || v > 65535) throw UsageError("udp_dst out of range: " + value);
                f.udp_dst = (uint16_t)v;
            } else if (key == "dir") {
                if (value == "in") f.direction = Direction::In;
                else if (value == "out") f.direction = Direction::Out;
                else if (value == "both") f.direction = Direction::Both;
                else throw UsageError("filter dir must be in, out, or both");
            } else {
                throw UsageError("unknown filter key '" + key +
                                 "' (expected iface, vlan, pcp, dmac, udp_dst, dir)");
            }
        } catch (const std::invalid_argument&) {
            throw UsageError("filter value '" + value + "' for " + key + " is not a number");
        } catch (const std::out_of_range&) {
            throw UsageError("filter value '" + value + "' for " + key + " is out of range");
        }
    }
    if (!f.any_criterion())
        throw UsageError("filter expression sets no criterion: '" + expr + "'");
    return f;
}

DetectorParams parse_detector_params(const std::vector<std::string>& kvs) {
    DetectorParams p;
    for (const auto& kv : kvs) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("--param '" + kv + "' is not key=value");
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        try {
            if (key == "learning_rate") p.learning_rate = std::stod(value);
            else if (key == "epochs") p.epochs = std::stoi(value);
            else if (key == "threshold_quantile") p.threshold_quantile = std::stod(value);
            else if (key == "bandwidth") p.bandwidth = std::stod(value);
            else if (key == "radius_scale") p.radius_scale = std::stod(value);
            else if (key == "trees") p.trees = std::stoi(value);
            else if (key == "max_samples") p.max_samples = std::stoi(value);
            else if (key == "contamination") p.contamination = std::stod(value);
            else if (key == "bins") p.bins = std::stoi(value);
            else
                throw UsageError("unknown detector parameter '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw UsageError("--param value '" + value + "' for " + key + " is not a number");
        } catch (const std::out_of_range&) {
            throw UsageError("--param value '" + value + "' for " + key + " is out of range");
        }
    }
    if (p.epochs < 1 || p.trees < 1 || p.max_samples < 2 || p.bins < 1)
        throw UsageError("detector parameters must be positive");
    if (p.contamination <= 0 || p.contamination >= 1 ||
        p.threshold_quantile <= 0 || p.threshold_quantile > 1)
        throw UsageError("contamination and threshold_quantile must lie in (0, 1)");
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    write_file_bytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override) {
    auto wall_start = std::chrono::steady_clock::now();

    ScenarioConfig cfg;
    try {
        cfg = load_scenario_file(config_path);
    } catch (const ScenarioError& e) {
        fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
        return kExitUsage;
    }
    if (seed_override) cfg.seed = *seed_override;

    ValidationReport report = validate_scenario(cfg);
    for (const auto& w : report.warnings)
        fprintf(stderr, "warning: %s: %s\n", w.path.c_str(), w.message.c_str());
    if (!report.ok()) {
        for (const auto& e : report.errors)
            fprintf(stderr, "error: %s: %s\n", e.path.c_str(), e.message.c_str());
        return kExitUsage;
    }

    SimResult result = run_simulation(cfg);

    // build the library entry in a scratch directory, then move it into
    // place so a crashed run leaves no partial entry behind
    fs::path entry = fs::path(out_dir) / cfg.name;
    if (fs::exists(entry)) {
        fprintf(stderr, "error: library entry already exists: %s\n", entry.string().c_str());
        return kExitRuntime;
    }
    fs::path scratch = fs::path(out_dir) / (cfg.name + ".partial");
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    RunManifest manifest;
    manifest.scenario = cfg.name;
    manifest.seed = cfg.seed;
    manifest.config_hash = content_hash(read_file_bytes(config_path));
    manifest.duration_ns = cfg.duration_ns;

    std::vector<std::string> written =
        write_capture(result.captures, scratch.string(), cfg.name);
    write_text((scratch / "stats.csv").string(), serialize_stats(result.stats));
    written.push_back((scratch / "stats.csv").string());
    write_text((scratch / "ledger.csv").string(), serialize_ledger(result.ledger));
    written.push_back((scratch / "ledger.csv").string());

    for (const auto& path : written)
        manifest.files.push_back({fs::path(path).filename().string(), file_content_hash(path)});
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    write_manifest(manifest, (scratch / "manifest.json").string());

    fs::rename(scratch, entry);
    printf("%s: %zu files, %lld packets captured, seed %llu\n", entry.string().c_str(),
           manifest.files.size() + 1,
           (long long)[&] {
               int64_t n = 0;
               for (const auto& p : result.captures.points) n += (int64_t)p.packets.size();
               return n;
           }(),
           (unsigned long long)cfg.seed);
    return 0;
}

int cmd_evaluate(const std::string& train_path, const std::string& test_path,
                 const std::string& filter_expr, const std::string& detector_name,
                 const std::vector<std::string>& param_kvs, uint64_t seed,
                 const std::string& out_dir) {
    auto kind = detector_kind_from_string(detector_name);
    if (!kind) {
        fprintf(stderr,
                "error: unknown detector '%s' (expected autoencoder, mean_shift, "
                "isolation_forest, hbos)\n",
                detector_name.c_str());
        return kExitUsage;
    }
    StreamFilter filter = parse_filter(filter_expr);
    DetectorParams params = parse_detector_params(param_kvs);

    CapturePointData train_cap = read_capture_file(train_path);
    CapturePointData test_cap = read_capture_file(test_path);

    auto train_windows = compute_window_metrics(filter_stream(train_cap, filter));
    auto test_windows = compute_window_metrics(filter_stream(test_cap, filter));
    if (train_windows.empty())
        throw MetricsError("no training windows after filtering " + train_path);
    if (test_windows.empty())
        throw MetricsError("no test windows after filtering " + test_path);

    DetectorModel model = train_detector(*kind, train_windows, params, seed);
    for (const auto& w : model.norm.warnings) fprintf(stderr, "warning: %s\n", w.c_str());

    std::vector<bool> predictions = score_windows(model, test_windows);
    std::vector<bool> truth;
    truth.reserve(test_windows.size());
    for (const auto& w : test_windows) truth.push_back(w.abnormal);
    EvalReport eval = evaluate(predictions, truth);

    fs::create_directories(out_dir);
    std::string prefix = std::string(detector_kind_name(*kind));
    write_text((fs::path(out_dir) / ("eval_" + prefix + ".csv")).string(),
               serialize_eval(eval));
    write_text((fs::path(out_dir) / ("trace_" + prefix + ".csv")).string(),
               serialize_trace(test_windows, predictions));

    printf("%s: tp=%lld fp=%lld tn=%lld fn=%lld precision=%s recall=%s\n", prefix.c_str(),
           (long long)eval.tp, (long long)eval.fp, (long long)eval.tn, (long long)eval.fn,
           eval.precision ? std::to_string(*eval.precision).c_str() : "n/a",
           eval.recall ? std::to_string(*eval.recall).c_str() : "n/a");
    return 0;
}

int cmd_report(const std::string& library_dir) {
    if (!fs::is_directory(library_dir)) {
        fprintf(stderr, "error: not a directory: %s\n", library_dir.c_str());
        return kExitUsage;
    }
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(library_dir))
        if (e.is_directory() && fs::exists(e.path() / "manifest.json"))
            entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());

    printf("scenario,detector,tp,fp,tn,fn,precision,recall\n");
    for (const auto& entry : entries) {
        RunManifest m = read_manifest((entry / "manifest.json").string());
        for (const auto& bad : verify_manifest(m, entry.string()))
            fprintf(stderr, "warning: %s/%s: content hash mismatch or missing file\n",
                    entry.filename().string().c_str(), bad.c_str());

        std::vector<fs::path> evals;
        for (const auto& f : fs::directory_iterator(entry)) {
            std::string name = f.path().filename().string();
            if (name.rfind("eval_", 0) == 0 && f.path().extension() == ".csv")
                evals.push_back(f.path());
        }
        std::sort(evals.begin(), evals.end());
        for (const auto& path : evals) {
            auto bytes = read_file_bytes(path.string());
            std::string text(bytes.begin(), bytes.end());
            size_t nl = text.find('\n');
            if (nl == std::string::npos) continue;
            std::string row = text.substr(nl + 1);
            while (!row.empty() && (row.back() == '\n' || row.back() == '\r')) row.pop_back();
            std::string stem = path.stem().string().substr(5);  // strip "eval_"
            printf("%s,%s,%s\n", m.scenario.c_str(), stem.c_str(), row.c_str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TSN backbone anomaly dataset toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int64_t seed_flag = -1;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario into the dataset library");
    simulate->add_option("--config", config_path, "scenario config JSON")->required();
    simulate->add_option("--out", out_dir, "dataset library directory")->required();
    simulate->add_option("--seed", seed_flag, "override the scenario seed");

    std::string train_path, test_path, filter_expr, detector_name, eval_out;
    std::vector<std::string> param_kvs;
    uint64_t eval_seed = 1;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Train and score a detector");
    evaluate_cmd->add_option("--train", train_path, "training capture (pcapng)")->required();
    evaluate_cmd->add_option("--test", test_path, "test capture (pcapng)")->required();
    evaluate_cmd->add_option("--filter", filter_expr,
                             "stream filter, comma-separated key=value "
                             "(iface, vlan, pcp, dmac, udp_dst, dir)")->required();
    evaluate_cmd->add_option("--detector", detector_name,
                             "autoencoder | mean_shift | isolation_forest | hbos")->required();
    evaluate_cmd->add_option("--param", param_kvs, "detector parameter k=v (repeatable)");
    evaluate_cmd->add_option("--seed", eval_seed, "training seed");
    evaluate_cmd->add_option("--out", eval_out, "output directory")->required();

    std::string library_dir;
    auto* report = app.add_subcommand("report", "Summarize a dataset library");
    report->add_option("--library", library_dir, "dataset library directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(config_path, out_dir,
                                seed_flag < 0 ? std::nullopt
                                              : std::optional<uint64_t>((uint64_t)seed_flag));
        if (evaluate_cmd->parsed())
            return cmd_evaluate(train_path, test_path, filter_expr, detector_name, param_kvs,
                                eval_seed, eval_out);
        return cmd_report(library_dir);
    } catch (const UsageError& e) {
        fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
