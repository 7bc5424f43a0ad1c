#include "nadsim/pcapng.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace nadsim {

namespace {

constexpr uint32_t kShbType = 0x0a0d0d0a;
constexpr uint32_t kIdbType = 0x00000001;
constexpr uint32_t kEpbType = 0x00000006;
constexpr uint32_t kByteOrderMagic = 0x1a2b3c4d;

void put_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back((uint8_t)x);
    v.push_back((uint8_t)(x >> 8));
}

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back((uint8_t)(x >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& v, uint64_t x) {
    for (int i = 0; i < 8; ++i) v.push_back((uint8_t)(x >> (8 * i)));
}

void pad32(std::vector<uint8_t>& v) {
    while (v.size() % 4) v.push_back(0);
}

void put_option(std::vector<uint8_t>& v, uint16_t code, const uint8_t* data, size_t len) {
    put_u16(v, code);
    put_u16(v, (uint16_t)len);
    v.insert(v.end(), data, data + len);
    pad32(v);
}

void put_end_of_options(std::vector<uint8_t>& v) {
    put_u16(v, 0);
    put_u16(v, 0);
}

// Appends a block: writes type + length placeholders around the body.
void append_block(std::vector<uint8_t>& out, uint32_t type, const std::vector<uint8_t>& body) {
    uint32_t total = (uint32_t)(body.size() + 12);
    put_u32(out, type);
    put_u32(out, total);
    out.insert(out.end(), body.begin(), body.end());
    put_u32(out, total);
}

struct Cursor {
    const std::vector<uint8_t>* bytes;
    size_t pos = 0;

    bool has(size_t n) const { return pos + n <= bytes->size(); }
    uint16_t u16() {
        uint16_t x = (uint16_t)((*bytes)[pos] | ((*bytes)[pos + 1] << 8));
        pos += 2;
        return x;
    }
    uint32_t u32() {
        uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= (uint32_t)(*bytes)[pos + i] << (8 * i);
        pos += 4;
        return x;
    }
};

}  // namespace

std::vector<uint8_t> encode_capture_point(const CapturePointData& point) {
    std::vector<uint8_t> out;

    std::vector<uint8_t> shb;
    put_u32(shb, kByteOrderMagic);
    put_u16(shb, 1);  // major
    put_u16(shb, 0);  // minor
    put_u64(shb, 0xffffffffffffffffull);  // section length unspecified
    append_block(out, kShbType, shb);

    std::vector<uint8_t> idb;
    put_u16(idb, 1);  // LINKTYPE_ETHERNET
    put_u16(idb, 0);  // reserved
    put_u32(idb, 65535);  // snaplen
    put_option(idb, 2, (const uint8_t*)point.interface_name.data(), point.interface_name.size());
    {
        uint8_t speed[8];
        uint64_t bps = (uint64_t)point.link_speed_bps;
        for (int i = 0; i < 8; ++i) speed[i] = (uint8_t)(bps >> (8 * i));
        put_option(idb, 8, speed, 8);  // if_speed
    }
    {
        uint8_t tsresol = 9;  // 10^-9
        put_option(idb, 9, &tsresol, 1);
    }
    put_end_of_options(idb);
    append_block(out, kIdbType, idb);

    TimeNs prev_ts = INT64_MIN;
    for (const auto& pkt : point.packets) {
        if (!pkt.frame || pkt.frame->size() > 65535)
            throw PcapngError("frame exceeds snap length on " + point.interface_name);
        if (pkt.ts < prev_ts)
            throw PcapngError("timestamps not monotonic on " + point.interface_name);
        prev_ts = pkt.ts;
        std::vector<uint8_t> epb;
        put_u32(epb, 0);  // interface id
        uint64_t ts = (uint64_t)pkt.ts;
        put_u32(epb, (uint32_t)(ts >> 32));
        put_u32(epb, (uint32_t)ts);
        put_u32(epb, (uint32_t)pkt.frame->size());
        put_u32(epb, pkt.wire_length > 0 ? (uint32_t)pkt.wire_length
                                         : (uint32_t)pkt.frame->size());
        epb.insert(epb.end(), pkt.frame->begin(), pkt.frame->end());
        pad32(epb);
        std::string comment = encode_label(pkt.labels);
        put_option(epb, 1, (const uint8_t*)comment.data(), comment.size());
        put_end_of_options(epb);
        append_block(out, kEpbType, epb);
    }
    return out;
}

void write_capture_file(const CapturePointData& point, const std::string& path) {
    write_file_bytes(path, encode_capture_point(point));
}

std::vector<std::string> write_capture(const CaptureSet& capture, const std::string& dir,
                                       const std::string& scenario_name) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& point : capture.points) {
        std::string iface = point.interface_name;
        for (auto& c : iface)
            if (c == '-') c = '_';
        std::string path = (fs::path(dir) / (scenario_name + "_" + iface + ".pcapng")).string();
        write_capture_file(point, path);
        paths.push_back(std::move(path));
    }
    return paths;
}

CapturePointData decode_capture_point(const std::vector<uint8_t>& bytes, int* skipped_blocks) {
    CapturePointData point;
    int skipped = 0;
    int ts_shift_pow10 = 0;  // multiply timestamps by 10^shift to reach ns

    Cursor c{&bytes};
    bool saw_shb = false, saw_idb = false;
    while (c.has(12)) {
        size_t block_start = c.pos;
        uint32_t type = c.u32();
        uint32_t total = c.u32();
        if (total < 12 || total % 4 != 0 || block_start + total > bytes.size())
            throw PcapngError("malformed block structure at offset " + std::to_string(block_start));
        size_t body_end = block_start + total - 4;
        Cursor tail{&bytes, body_end};
        if (tail.u32() != total)
            throw PcapngError("trailing block length mismatch at offset " +
                              std::to_string(block_start));

        if (type == kShbType) {
            uint32_t magic = c.u32();
            if (magic != kByteOrderMagic)
                throw PcapngError("unsupported byte order magic");
            saw_shb = true;
        } else if (type == kIdbType) {
            if (!saw_shb) throw PcapngError("interface block before section header");
            c.u16();  // linktype
            c.u16();
            c.u32();  // snaplen
            uint8_t tsresol = 6;  // pcapng default: microseconds
            while (c.pos + 4 <= body_end) {
                uint16_t code = c.u16();
                uint16_t len = c.u16();
                if (c.pos + len > body_end) throw PcapngError("option overruns block");
                if (code == 0) break;
                if (code == 2) point.interface_name.assign((const char*)&bytes[c.pos], len);
                if (code == 8 && len == 8) {
                    uint64_t bps = 0;
                    for (int i = 0; i < 8; ++i) bps |= (uint64_t)bytes[c.pos + i] << (8 * i);
                    point.link_speed_bps = (int64_t)bps;
                }
                if (code == 9 && len == 1 && !(bytes[c.pos] & 0x80)) tsresol = bytes[c.pos];
                c.pos += len + ((4 - len % 4) % 4);
            }
            if (tsresol > 9) throw PcapngError("sub-nanosecond timestamp resolution unsupported");
            ts_shift_pow10 = 9 - tsresol;
            saw_idb = true;
        } else if (type == kEpbType) {
            if (!saw_idb) throw PcapngError("packet block before interface description");
            c.u32();  // interface id
            uint64_t ts = ((uint64_t)c.u32() << 32) | c.u32();
            uint32_t caplen = c.u32();
            uint32_t origlen = c.u32();
            if (c.pos + caplen > body_end) throw PcapngError("packet data overruns block");
            LabeledPacket pkt;
            if (origlen != caplen) pkt.wire_length = (int)origlen;
            pkt.frame = std::make_shared<std::vector<uint8_t>>(bytes.begin() + c.pos,
                                                               bytes.begin() + c.pos + caplen);
            c.pos += caplen + ((4 - caplen % 4) % 4);
            for (int i = 0; i < ts_shift_pow10; ++i) ts *= 10;
            pkt.ts = (TimeNs)ts;
            while (c.pos + 4 <= body_end) {
                uint16_t code = c.u16();
                uint16_t len = c.u16();
                if (c.pos + len > body_end) throw PcapngError("option overruns block");
                if (code == 0) break;
                if (code == 1) {
                    std::string comment((const char*)&bytes[c.pos], len);
                    if (auto labels = parse_label(comment)) pkt.labels = *labels;
                }
                c.pos += len + ((4 - len % 4) % 4);
            }
            point.packets.push_back(std::move(pkt));
        } else {
            ++skipped;
        }
        c.pos = block_start + total;
    }
    if (!saw_shb) throw PcapngError("missing section header block");
    if (skipped_blocks) *skipped_blocks = skipped;
    return point;
}

CapturePointData read_capture_file(const std::string& path, int* skipped_blocks) {
    return decode_capture_point(read_file_bytes(path), skipped_blocks);
}

CaptureSet read_capture(const std::string& path) {
    CaptureSet set;
    set.points.push_back(read_capture_file(path));
    return set;
}

std::optional<std::string> validate_pcapng(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 28) return "file shorter than a section header block";
    size_t pos = 0;
    bool first = true;
    while (pos + 12 <= bytes.size()) {
        uint32_t type = 0, total = 0;
        for (int i = 0; i < 4; ++i) type |= (uint32_t)bytes[pos + i] << (8 * i);
        for (int i = 0; i < 4; ++i) total |= (uint32_t)bytes[pos + 4 + i] << (8 * i);
        if (first) {
            if (type != kShbType) return "first block is not a section header";
            uint32_t magic = 0;
            for (int i = 0; i < 4; ++i) magic |= (uint32_t)bytes[pos + 8 + i] << (8 * i);
            if (magic != kByteOrderMagic) return "bad byte-order magic";
            first = false;
        }
        if (total < 12) return "block length below minimum at offset " + std::to_string(pos);
        if (total % 4 != 0) return "block length not 32-bit aligned at offset " + std::to_string(pos);
        if (pos + total > bytes.size()) return "block overruns file at offset " + std::to_string(pos);
        uint32_t tail = 0;
        for (int i = 0; i < 4; ++i) tail |= (uint32_t)bytes[pos + total - 4 + i] << (8 * i);
        if (tail != total) return "trailing length mismatch at offset " + std::to_string(pos);
        pos += total;
    }
    if (pos != bytes.size()) return "trailing bytes after last block";
    return std::nullopt;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PcapngError("cannot open file: " + path);
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PcapngError("unwritable path: " + path);
    out.write((const char*)bytes.data(), (std::streamsize)bytes.size());
    if (!out) throw PcapngError("write failed: " + path);
}

}  // namespace nadsim
