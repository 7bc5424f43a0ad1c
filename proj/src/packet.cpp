#include "nadsim/packet.hpp"

#include <cstdio>
#include <cstring>

#include "nadsim/rng.hpp"

namespace nadsim {

namespace {

constexpr const char* kLabelNames[] = {"BENIGN",   "BENIGN RECOVERED", "DELAYED",
                                       "INJECTED", "MANIPULATED",      "REORDERED"};

void put_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back((uint8_t)(x >> 8));
    v.push_back((uint8_t)x);
}

uint16_t get_u16(const std::vector<uint8_t>& v, size_t off) {
    return (uint16_t)((v[off] << 8) | v[off + 1]);
}

uint16_t ipv4_checksum(const uint8_t* data, size_t len) {
    uint32_t sum = 0;
    for (size_t i = 0; i + 1 < len; i += 2) sum += (uint32_t)((data[i] << 8) | data[i + 1]);
    if (len & 1) sum += (uint32_t)(data[len - 1] << 8);
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return (uint16_t)~sum;
}

}  // namespace

const char* packet_label_name(PacketLabel label) { return kLabelNames[(int)label]; }

std::string encode_label(const LabelPair& labels) {
    return std::string(packet_label_name(labels.packet_label)) + " - " + labels.phase_label;
}

std::optional<LabelPair> parse_label(const std::string& text) {
    auto sep = text.find(" - ");
    if (sep == std::string::npos) return std::nullopt;
    std::string packet = text.substr(0, sep);
    LabelPair out;
    out.phase_label = text.substr(sep + 3);
    for (int i = 0; i < 6; ++i) {
        if (packet == kLabelNames[i]) {
            out.packet_label = (PacketLabel)i;
            return out;
        }
    }
    return std::nullopt;
}

std::string mac_to_string(const MacAddress& mac) {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2],
                  mac[3], mac[4], mac[5]);
    return buf;
}

std::optional<MacAddress> mac_from_string(const std::string& text) {
    MacAddress mac;
    unsigned v[6];
    if (std::sscanf(text.c_str(), "%x:%x:%x:%x:%x:%x", &v[0], &v[1], &v[2], &v[3], &v[4], &v[5]) != 6)
        return std::nullopt;
    for (int i = 0; i < 6; ++i) {
        if (v[i] > 0xff) return std::nullopt;
        mac[i] = (uint8_t)v[i];
    }
    return mac;
}

MacAddress stream_group_mac(const std::string& stream_id) {
    uint64_t h = Rng::fnv1a64(stream_id);
    // locally administered multicast group address
    return {0x03, 0x4e, (uint8_t)(h >> 24), (uint8_t)(h >> 16), (uint8_t)(h >> 8), (uint8_t)h};
}

MacAddress node_mac(int node_index) {
    return {0x02, 0x4e, 0x41, 0x44, (uint8_t)(node_index >> 8), (uint8_t)node_index};
}

FrameBytes build_frame(const StreamSpec& stream, int src_node_index, uint64_t seq) {
    auto frame = std::make_shared<std::vector<uint8_t>>();
    auto& v = *frame;
    v.reserve(stream.frame_size);

    MacAddress dst = stream_group_mac(stream.id);
    MacAddress src = node_mac(src_node_index);
    v.insert(v.end(), dst.begin(), dst.end());
    v.insert(v.end(), src.begin(), src.end());
    put_u16(v, 0x8100);
    put_u16(v, (uint16_t)((stream.pcp << 13) | (stream.vlan_id & 0x0fff)));

    uint64_t h = Rng::fnv1a64(stream.id);
    if (stream.transport.kind == TransportSpec::Kind::UdpTunnel) {
        put_u16(v, 0x0800);
        int ip_total = stream.frame_size - 18;  // frame minus eth+vlan header
        size_t ip_off = v.size();
        v.push_back(0x45);
        v.push_back(0x00);
        put_u16(v, (uint16_t)ip_total);
        put_u16(v, (uint16_t)seq);  // identification
        put_u16(v, 0x4000);         // don't fragment
        v.push_back(1);             // ttl
        v.push_back(17);            // udp
        put_u16(v, 0);              // checksum placeholder
        v.push_back(10);            // src 10.0.x.y
        v.push_back(0);
        v.push_back((uint8_t)(src_node_index >> 8));
        v.push_back((uint8_t)src_node_index);
        v.push_back(239);  // dst multicast group from stream hash
        v.push_back((uint8_t)(h >> 16));
        v.push_back((uint8_t)(h >> 8));
        v.push_back((uint8_t)h);
        uint16_t csum = ipv4_checksum(v.data() + ip_off, 20);
        v[ip_off + 10] = (uint8_t)(csum >> 8);
        v[ip_off + 11] = (uint8_t)csum;
        put_u16(v, 40000);  // udp src
        put_u16(v, stream.transport.dest_port);
        put_u16(v, (uint16_t)(ip_total - 20));
        put_u16(v, 0);  // udp checksum unused
    } else {
        put_u16(v, 0x88b5);  // local experimental ethertype
    }

    uint64_t fill = h ^ (seq * 0x9e3779b97f4a7c15ull);
    while ((int)v.size() < stream.frame_size) {
        fill = fill * 6364136223846793005ull + 1442695040888963407ull;
        v.push_back((uint8_t)(fill >> 56));
    }
    v.resize(stream.frame_size);
    return frame;
}

std::optional<ParsedFrame> parse_frame(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 14) return std::nullopt;
    ParsedFrame f;
    std::memcpy(f.dst_mac.data(), bytes.data(), 6);
    std::memcpy(f.src_mac.data(), bytes.data() + 6, 6);
    size_t off = 12;
    uint16_t type = get_u16(bytes, off);
    off += 2;
    if (type == 0x8100) {
        if (bytes.size() < off + 4) return std::nullopt;
        uint16_t tci = get_u16(bytes, off);
        f.pcp = tci >> 13;
        f.vlan_id = tci & 0x0fff;
        off += 2;
        type = get_u16(bytes, off);
        off += 2;
    }
    f.ethertype = type;
    if (type == 0x0800 && bytes.size() >= off + 20) {
        uint8_t ihl = (uint8_t)(bytes[off] & 0x0f) * 4;
        uint8_t proto = bytes[off + 9];
        if (proto == 17 && bytes.size() >= off + ihl + 8)
            f.udp_dst = get_u16(bytes, off + ihl + 2);
    }
    return f;
}

}  // namespace nadsim
