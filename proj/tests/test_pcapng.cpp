#include <doctest.h>

#include <cstring>

#include "nadsim/pcapng.hpp"

using namespace nadsim;

namespace {

uint32_t rd32(const std::vector<uint8_t>& b, size_t off) {
    uint32_t v;
    std::memcpy(&v, b.data() + off, 4);
    return v;
}

FrameBytes tiny_frame(uint8_t fill) {
    auto f = std::make_shared<std::vector<uint8_t>>(64, fill);
    return f;
}

CapturePointData sample_point() {
    CapturePointData p;
    p.interface_name = "switchFrontRight-ringRR-in";
    p.link_speed_bps = 1'000'000'000;
    p.packets.push_back({1'000, tiny_frame(0xaa), {PacketLabel::Benign, ""}});
    p.packets.push_back({2'003'023'000, tiny_frame(0xbb), {PacketLabel::Delayed, "DELAYED"}});
    p.packets.push_back({2'004'000'000, tiny_frame(0xcc), {PacketLabel::BenignRecovered, "DELAYED"}});
    return p;
}

}  // namespace

TEST_CASE("label codec") {
    CHECK(encode_label({PacketLabel::Benign, ""}) == "BENIGN - ");
    CHECK(encode_label({PacketLabel::BenignRecovered, "DELAYED"}) == "BENIGN RECOVERED - DELAYED");
    CHECK(parse_label("BENIGN - ") == LabelPair{PacketLabel::Benign, ""});
    CHECK(parse_label("INJECTED - INJECTED") == LabelPair{PacketLabel::Injected, "INJECTED"});
    CHECK(parse_label("REORDERED - REORDERED") == LabelPair{PacketLabel::Reordered, "REORDERED"});
    CHECK(!parse_label("GARBAGE").has_value());
    CHECK(!parse_label("GARBAGE - DELAYED").has_value());
}

TEST_CASE("capture point without packets is a section header plus one interface block") {
    CapturePointData p;
    p.interface_name = "eth0";
    p.link_speed_bps = 100'000'000;
    std::vector<uint8_t> bytes = encode_capture_point(p);
    REQUIRE(bytes.size() >= 12);
    CHECK(rd32(bytes, 0) == 0x0A0D0D0A);       // section header
    CHECK(rd32(bytes, 8) == 0x1A2B3C4D);       // little-endian byte-order magic
    size_t shb_len = rd32(bytes, 4);
    CHECK(rd32(bytes, shb_len) == 1);          // interface description block
    CHECK(validate_pcapng(bytes) == std::nullopt);
    CHECK(bytes.size() == shb_len + rd32(bytes, shb_len + 4));
}

TEST_CASE("encode-decode round trip preserves timestamps, bytes and labels") {
    CapturePointData p = sample_point();
    std::vector<uint8_t> bytes = encode_capture_point(p);
    CHECK(validate_pcapng(bytes) == std::nullopt);

    int skipped = -1;
    CapturePointData q = decode_capture_point(bytes, &skipped);
    CHECK(skipped == 0);
    CHECK(q.interface_name == p.interface_name);
    CHECK(q.link_speed_bps == p.link_speed_bps);
    REQUIRE(q.packets.size() == p.packets.size());
    for (size_t i = 0; i < p.packets.size(); ++i) {
        CHECK(q.packets[i].ts == p.packets[i].ts);
        CHECK(*q.packets[i].frame == *p.packets[i].frame);
        CHECK(q.packets[i].labels == p.packets[i].labels);
    }
}

TEST_CASE("encoding is byte deterministic") {
    CapturePointData p = sample_point();
    CHECK(encode_capture_point(p) == encode_capture_point(p));
}

TEST_CASE("writer rejects out-of-order timestamps") {
    CapturePointData p = sample_point();
    std::swap(p.packets[0], p.packets[1]);
    CHECK_THROWS_AS(encode_capture_point(p), PcapngError);
}

TEST_CASE("validator pinpoints structural damage") {
    std::vector<uint8_t> bytes = encode_capture_point(sample_point());
    SUBCASE("truncated file") {
        bytes.resize(bytes.size() - 5);
        CHECK(validate_pcapng(bytes).has_value());
    }
    SUBCASE("mismatched trailing length") {
        bytes[bytes.size() - 4] ^= 0xff;
        CHECK(validate_pcapng(bytes).has_value());
    }
    SUBCASE("first block is not a section header") {
        bytes[0] ^= 0xff;
        CHECK(validate_pcapng(bytes).has_value());
    }
}

TEST_CASE("reader skips unknown block types and counts them") {
    std::vector<uint8_t> bytes = encode_capture_point(sample_point());
    // append a minimal custom block (type 0x0BAD, 12 bytes)
    uint32_t blk[3] = {0x0BAD, 12, 12};
    const uint8_t* raw = reinterpret_cast<const uint8_t*>(blk);
    bytes.insert(bytes.end(), raw, raw + 12);
    CHECK(validate_pcapng(bytes) == std::nullopt);
    int skipped = 0;
    CapturePointData q = decode_capture_point(bytes, &skipped);
    CHECK(skipped == 1);
    CHECK(q.packets.size() == 3);
}

TEST_CASE("packets without a comment option read back as benign") {
    // hand-build an EPB without options to mimic a foreign capture
    CapturePointData p;
    p.interface_name = "x";
    p.link_speed_bps = 0;
    std::vector<uint8_t> bytes = encode_capture_point(p);

    std::vector<uint8_t> epb;
    auto put32 = [&](uint32_t v) {
        const uint8_t* r = reinterpret_cast<const uint8_t*>(&v);
        epb.insert(epb.end(), r, r + 4);
    };
    put32(0x00000006);
    put32(0);  // total length patched below
    put32(0);  // interface id
    put32(0);  // ts high
    put32(5'000);  // ts low
    put32(64);  // captured length
    put32(64);  // original length
    for (int i = 0; i < 16; ++i) put32(0x11111111);
    put32(0);  // total length back, patched below
    uint32_t total = (uint32_t)epb.size();
    std::memcpy(epb.data() + 4, &total, 4);
    std::memcpy(epb.data() + epb.size() - 4, &total, 4);
    bytes.insert(bytes.end(), epb.begin(), epb.end());

    CHECK(validate_pcapng(bytes) == std::nullopt);
    CapturePointData q = decode_capture_point(bytes);
    REQUIRE(q.packets.size() == 1);
    CHECK(q.packets[0].labels == LabelPair{PacketLabel::Benign, ""});
    CHECK(q.packets[0].frame->size() == 64);
}

TEST_CASE("file round trip through the filesystem") {
    CapturePointData p = sample_point();
    std::string path = "/tmp/nadsim_test_capture.pcapng";
    write_capture_file(p, path);
    CapturePointData q = read_capture_file(path);
    CHECK(q.interface_name == p.interface_name);
    CHECK(q.packets.size() == p.packets.size());
}

TEST_CASE("capture set writer derives file names from interface names") {
    CaptureSet set;
    set.points.push_back(sample_point());
    auto paths = write_capture(set, "/tmp", "baseline");
    REQUIRE(paths.size() == 1);
    CHECK(paths[0] == "/tmp/baseline_switchFrontRight_ringRR_in.pcapng");
    CaptureSet back = read_capture(paths[0]);
    REQUIRE(back.points.size() == 1);
    CHECK(back.points[0].packets.size() == 3);
}
