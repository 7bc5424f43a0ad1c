#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nadsim {

using TimeNs = int64_t;  // all times are integer nanoseconds

enum class NodeKind { Endpoint, Switch };

struct NodeSpec {
    std::string name;
    NodeKind kind = NodeKind::Endpoint;
};

struct LinkSpec {
    std::string node_a, port_a;
    std::string node_b, port_b;
    int64_t rate_bps = 0;
    TimeNs propagation_delay_ns = 0;
};

enum class ShapingClass { Timed, Shaped, StrictPriority };

struct TasParams {
    TimeNs cycle_ns = 1'000'000;
    TimeNs window_ns = 10'000;
    TimeNs hop_offset_ns = 31'000;  // per-hop forwarding window stride
};

struct CbsParams {
    double slope_factor = 1.1;  // idle slope = stream rate x factor
};

struct ClockParams {
    double drift_ppm = 2.0;  // residual rate error after sync servo, +/- bound
    TimeNs sync_interval_ns = 125'000'000;
    TimeNs post_sync_offset_bound_ns = 500;
};

struct Topology {
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    TasParams tas;
    CbsParams cbs;
    ClockParams clock;
    TimeNs switch_processing_ns = 2'000;
    int queue_bound_frames = 512;
    // pcp -> shaping class mapping for validation and port setup
    ShapingClass pcp_class[8] = {ShapingClass::StrictPriority, ShapingClass::StrictPriority,
                                 ShapingClass::StrictPriority, ShapingClass::StrictPriority,
                                 ShapingClass::StrictPriority, ShapingClass::Shaped,
                                 ShapingClass::Timed,          ShapingClass::StrictPriority};

    const NodeSpec* find_node(const std::string& name) const;
    bool has_port(const std::string& node, const std::string& port) const;
};

struct CycleSpec {
    enum class Kind { Fixed, Uniform, Exponential } kind = Kind::Fixed;
    TimeNs lo_ns = 0;  // Fixed: period; Uniform: low bound; Exponential: mean
    TimeNs hi_ns = 0;  // Uniform only

    TimeNs mean_ns() const {
        return kind == Kind::Uniform ? (lo_ns + hi_ns) / 2 : lo_ns;
    }
};

struct TransportSpec {
    enum class Kind { UdpTunnel, Raw } kind = Kind::Raw;
    uint16_t dest_port = 0;  // UdpTunnel only
};

enum class FrerEliminationPoint { Listener, LastSwitch };

struct StreamSpec {
    std::string id;
    int pcp = 0;
    std::string source;
    std::vector<std::string> destinations;  // patterns, '*' matches any suffix
    std::vector<std::string> resolved_destinations;
    int frame_size = 64;  // on-wire bytes incl. headers, excl. preamble/IFG
    CycleSpec cycle;
    TimeNs start_offset_ns = 0;
    ShapingClass shaping_class = ShapingClass::StrictPriority;
    bool redundant = false;
    FrerEliminationPoint frer_elimination = FrerEliminationPoint::Listener;
    TransportSpec transport;
    int vlan_id = 1;
};

enum class AnomalyKind { Delay, Eliminate, Inject, Manipulate, Reorder };

enum class Direction { In, Out, Both };

struct PortRef {
    std::string node;
    std::string port;
    Direction direction = Direction::Out;
};

// Criteria over packets; unset fields match everything. Used both for NADS
// stream filtering and anomaly targeting.
struct StreamFilter {
    std::optional<std::string> iface;
    std::optional<int> vlan;
    std::optional<int> pcp;
    std::optional<std::string> dst_mac;  // "aa:bb:cc:dd:ee:ff"
    std::optional<uint16_t> udp_dst;
    Direction direction = Direction::Both;

    bool any_criterion() const {
        return iface || vlan || pcp || dst_mac || udp_dst;
    }
};

struct PhaseSpec {
    TimeNs start_ns = 0;
    TimeNs active_ns = 0;
    TimeNs inactive_ns = 0;
    std::string label;
};

struct AnomalyParams {
    TimeNs delay_ns = 0;                       // Delay
    TimeNs inject_period_ns = 0;               // Inject: candidate grid period
    int inject_payload_bytes = 8;              // Inject: payload template size
    uint8_t inject_payload_fill = 0;           // Inject: payload template byte
    int manipulate_offset = 0;                 // Manipulate: first payload byte
    int manipulate_length = 0;                 // Manipulate: byte count
    uint8_t manipulate_value = 0;              // Manipulate: replacement byte
    int reorder_displacement = 1;              // Reorder: packets to fall behind
};

struct AnomalyConfig {
    std::string id;
    AnomalyKind kind = AnomalyKind::Delay;
    PortRef location;
    StreamFilter target;
    PhaseSpec phase;
    double probability = 1.0;
    TimeNs min_clearance_ns = 0;
    AnomalyParams params;
};

struct ScenarioConfig {
    std::string name;
    std::optional<std::string> base;
    TimeNs duration_ns = 0;
    uint64_t seed = 0;
    Topology topology;
    std::vector<StreamSpec> streams;
    std::vector<AnomalyConfig> anomalies;
    std::vector<PortRef> capture_points;

    const StreamSpec* find_stream(const std::string& id) const;
};

struct ValidationIssue {
    std::string path;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;
    int resolved_stream_count = 0;

    bool ok() const { return errors.empty(); }
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resolves a referenced resource (base scenario by name, matrix file by
// filename) to its text content. Returns nullopt when unknown.
using ResourceResolver = std::function<std::optional<std::string>(const std::string&)>;

// Parse a scenario document. Applies `base` inheritance (child keys override
// parent key-by-key, lists replace) and expands communication-matrix entries
// and destination wildcards. Throws ScenarioError on malformed input.
ScenarioConfig parse_scenario(const std::string& text, const ResourceResolver& resolver = {});

// Convenience: load from a file; base scenarios and matrix files are resolved
// relative to the file's directory (base name -> "<name>.json").
ScenarioConfig load_scenario_file(const std::string& path);

std::string serialize_scenario(const ScenarioConfig& cfg);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

ValidationReport validate_scenario(const ScenarioConfig& cfg);

// Expand a destination pattern list over declared node names. '*' matches any
// suffix; the source node is excluded from the result.
std::vector<std::string> expand_destinations(const std::vector<std::string>& patterns,
                                             const Topology& topo,
                                             const std::string& source);

}  // namespace nadsim
