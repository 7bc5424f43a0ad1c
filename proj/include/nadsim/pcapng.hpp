#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nadsim/packet.hpp"

namespace nadsim {

struct PcapngError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Serialize one capture point: Section Header Block, one Interface
// Description Block (if_name, if_speed, if_tsresol = 1 ns), one Enhanced
// Packet Block per packet carrying the label string as opt_comment.
// Little-endian, byte-deterministic.
std::vector<uint8_t> encode_capture_point(const CapturePointData& point);

void write_capture_file(const CapturePointData& point, const std::string& path);

// One file per capture point, named `<scenario>_<node>_<port>_<dir>.pcapng`
// (derived from the interface name). Returns the written paths.
std::vector<std::string> write_capture(const CaptureSet& capture, const std::string& dir,
                                       const std::string& scenario_name);

// Inverse of the writer for self-produced files; tolerant for external ones
// (missing comments -> BENIGN, coarser timestamp resolution upscaled to ns).
// Unsupported block types are skipped and counted in skipped_blocks.
CapturePointData decode_capture_point(const std::vector<uint8_t>& bytes,
                                      int* skipped_blocks = nullptr);

CapturePointData read_capture_file(const std::string& path, int* skipped_blocks = nullptr);

CaptureSet read_capture(const std::string& path);

// Structural validation independent of the reader: block total lengths match
// front and back, blocks and options are 32-bit padded, the section starts
// with a little-endian SHB. Returns an error description, or nullopt when
// the file is well-formed.
std::optional<std::string> validate_pcapng(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace nadsim
