#include "nadsim/manifest.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nadsim/pcapng.hpp"

namespace nadsim {

uint64_t content_hash(const std::vector<uint8_t>& bytes) {
    // FNV-1a 64, same primitive the rng seeding uses
    uint64_t h = 1469598103934665603ull;
    for (uint8_t c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t file_content_hash(const std::string& path) {
    return content_hash(read_file_bytes(path));
}

namespace {

std::string hex64(uint64_t v) {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
    return buf;
}

uint64_t parse_hex64(const std::string& s) {
    if (s.size() != 16) throw ManifestError("bad hash string: " + s);
    return std::stoull(s, nullptr, 16);
}

}  // namespace

std::string serialize_manifest(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["scenario"] = m.scenario;
    j["seed"] = m.seed;
    j["config_hash"] = hex64(m.config_hash);
    j["duration_ns"] = m.duration_ns;
    j["wall_seconds"] = m.wall_seconds;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : m.files)
        j["files"].push_back({{"name", f.name}, {"hash", hex64(f.hash)}});
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest m;
    try {
        m.scenario = j.at("scenario").get<std::string>();
        m.seed = j.at("seed").get<uint64_t>();
        m.config_hash = parse_hex64(j.at("config_hash").get<std::string>());
        m.duration_ns = j.at("duration_ns").get<int64_t>();
        m.wall_seconds = j.at("wall_seconds").get<double>();
        for (const auto& f : j.at("files")) {
            ManifestFile mf;
            mf.name = f.at("name").get<std::string>();
            mf.hash = parse_hex64(f.at("hash").get<std::string>());
            m.files.push_back(std::move(mf));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(std::string("manifest field missing or mistyped: ") + e.what());
    }
    return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    std::string text = serialize_manifest(m);
    write_file_bytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

RunManifest read_manifest(const std::string& path) {
    auto bytes = read_file_bytes(path);
    return parse_manifest(std::string(bytes.begin(), bytes.end()));
}

std::vector<std::string> verify_manifest(const RunManifest& m, const std::string& dir) {
    std::vector<std::string> bad;
    for (const auto& f : m.files) {
        std::filesystem::path p = std::filesystem::path(dir) / f.name;
        std::error_code ec;
        if (!std::filesystem::exists(p, ec)) {
            bad.push_back(f.name);
            continue;
        }
        if (file_content_hash(p.string()) != f.hash) bad.push_back(f.name);
    }
    return bad;
}

}  // namespace nadsim
