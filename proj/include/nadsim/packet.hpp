#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nadsim/scenario.hpp"

namespace nadsim {

enum class PacketLabel { Benign, BenignRecovered, Delayed, Injected, Manipulated, Reordered };

struct LabelPair {
    PacketLabel packet_label = PacketLabel::Benign;
    std::string phase_label;  // empty when no phase is active

    bool operator==(const LabelPair&) const = default;
};

// Label comment grammar: `<PACKET_LABEL> " - " <PHASE_LABEL?>`.
std::string encode_label(const LabelPair& labels);
std::optional<LabelPair> parse_label(const std::string& text);

const char* packet_label_name(PacketLabel label);

using MacAddress = std::array<uint8_t, 6>;

std::string mac_to_string(const MacAddress& mac);
std::optional<MacAddress> mac_from_string(const std::string& text);

// Fields recovered from raw frame bytes; used by stream filters.
struct ParsedFrame {
    MacAddress dst_mac{};
    MacAddress src_mac{};
    std::optional<int> vlan_id;
    std::optional<int> pcp;
    uint16_t ethertype = 0;
    std::optional<uint16_t> udp_dst;
};

using FrameBytes = std::shared_ptr<const std::vector<uint8_t>>;

std::optional<ParsedFrame> parse_frame(const std::vector<uint8_t>& bytes);

MacAddress stream_group_mac(const std::string& stream_id);
MacAddress node_mac(int node_index);

// Build the on-wire Ethernet frame for one stream packet (VLAN-tagged;
// IPv4/UDP when tunneled, local-experimental ethertype otherwise), padded to
// the stream's frame size with a deterministic filler.
FrameBytes build_frame(const StreamSpec& stream, int src_node_index, uint64_t seq);

struct LabeledPacket {
    TimeNs ts = 0;  // local clock of the capturing node
    FrameBytes frame;
    LabelPair labels;
    int wire_length = 0;  // on-wire size when frame is snap-truncated; 0 = frame size
};

struct CapturePointData {
    std::string interface_name;  // e.g. "switchFrontRight-ringRR-in"
    int64_t link_speed_bps = 0;
    std::vector<LabeledPacket> packets;
};

struct CaptureSet {
    std::vector<CapturePointData> points;

    const CapturePointData* find(const std::string& interface_name) const {
        for (const auto& p : points)
            if (p.interface_name == interface_name) return &p;
        return nullptr;
    }
};

}  // namespace nadsim
