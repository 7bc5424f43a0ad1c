#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nadsim {

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifestFile {
    std::string name;  // relative to the manifest's directory
    uint64_t hash = 0;
};

// Record of one simulate run: what was produced and from what, with content
// hashes so later readers can detect tampering or partial copies.
struct RunManifest {
    std::string scenario;
    uint64_t seed = 0;
    uint64_t config_hash = 0;
    int64_t duration_ns = 0;       // simulated duration
    double wall_seconds = 0;       // real time the run took
    std::vector<ManifestFile> files;
};

uint64_t content_hash(const std::vector<uint8_t>& bytes);
uint64_t file_content_hash(const std::string& path);

std::string serialize_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

// Recompute every file hash relative to the manifest's directory. Returns
// the names of files that are missing or whose hash differs.
std::vector<std::string> verify_manifest(const RunManifest& m, const std::string& dir);

}  // namespace nadsim
