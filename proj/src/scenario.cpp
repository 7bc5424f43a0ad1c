#include "nadsim/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nadsim {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ScenarioError(path.empty() ? msg : path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }) == allowed.end())
            fail(path, "unknown key '" + it.key() + "'");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing required field '") + key + "'");
    return *it;
}

std::string shaping_to_string(ShapingClass c) {
    switch (c) {
        case ShapingClass::Timed: return "timed";
        case ShapingClass::Shaped: return "shaped";
        default: return "strict_priority";
    }
}

ShapingClass shaping_from_string(const std::string& s, const std::string& path) {
    if (s == "timed") return ShapingClass::Timed;
    if (s == "shaped") return ShapingClass::Shaped;
    if (s == "strict_priority") return ShapingClass::StrictPriority;
    fail(path, "unknown shaping class '" + s + "'");
}

std::string direction_to_string(Direction d) {
    switch (d) {
        case Direction::In: return "in";
        case Direction::Out: return "out";
        default: return "both";
    }
}

Direction direction_from_string(const std::string& s, const std::string& path) {
    if (s == "in") return Direction::In;
    if (s == "out") return Direction::Out;
    if (s == "both") return Direction::Both;
    fail(path, "unknown direction '" + s + "'");
}

std::string anomaly_kind_to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::Delay: return "delay";
        case AnomalyKind::Eliminate: return "eliminate";
        case AnomalyKind::Inject: return "inject";
        case AnomalyKind::Manipulate: return "manipulate";
        default: return "reorder";
    }
}

AnomalyKind anomaly_kind_from_string(const std::string& s, const std::string& path) {
    if (s == "delay") return AnomalyKind::Delay;
    if (s == "eliminate") return AnomalyKind::Eliminate;
    if (s == "inject") return AnomalyKind::Inject;
    if (s == "manipulate") return AnomalyKind::Manipulate;
    if (s == "reorder") return AnomalyKind::Reorder;
    fail(path, "unknown anomaly kind '" + s + "'");
}

void split_port_ref(const std::string& s, const std::string& path, std::string& node, std::string& port) {
    auto dot = s.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size())
        fail(path, "expected '<node>.<port>', got '" + s + "'");
    node = s.substr(0, dot);
    port = s.substr(dot + 1);
}

// Child keys override parent keys; objects merge recursively, everything else
// (including lists) replaces.
json merge_configs(const json& parent, const json& child) {
    if (!parent.is_object() || !child.is_object()) return child;
    json out = parent;
    for (auto it = child.begin(); it != child.end(); ++it) {
        auto pit = out.find(it.key());
        if (pit != out.end() && pit->is_object() && it->is_object())
            *pit = merge_configs(*pit, *it);
        else
            out[it.key()] = *it;
    }
    return out;
}

Topology parse_topology(const json& j, const std::string& path) {
    Topology topo;
    check_keys(j, path, {"nodes", "links", "tas", "cbs", "clock", "switch_processing_ns",
                         "queue_bound_frames", "pcp_class"});
    const json& nodes = require(j, path, "nodes");
    int idx = 0;
    for (const auto& n : nodes) {
        std::string p = path + ".nodes[" + std::to_string(idx++) + "]";
        check_keys(n, p, {"name", "kind"});
        NodeSpec spec;
        spec.name = require(n, p, "name").get<std::string>();
        std::string kind = require(n, p, "kind").get<std::string>();
        if (kind == "endpoint") spec.kind = NodeKind::Endpoint;
        else if (kind == "switch") spec.kind = NodeKind::Switch;
        else fail(p, "unknown node kind '" + kind + "'");
        topo.nodes.push_back(std::move(spec));
    }
    idx = 0;
    for (const auto& l : require(j, path, "links")) {
        std::string p = path + ".links[" + std::to_string(idx++) + "]";
        check_keys(l, p, {"a", "b", "rate_bps", "propagation_delay_ns"});
        LinkSpec spec;
        split_port_ref(require(l, p, "a").get<std::string>(), p, spec.node_a, spec.port_a);
        split_port_ref(require(l, p, "b").get<std::string>(), p, spec.node_b, spec.port_b);
        spec.rate_bps = require(l, p, "rate_bps").get<int64_t>();
        spec.propagation_delay_ns = l.value("propagation_delay_ns", (int64_t)0);
        topo.links.push_back(std::move(spec));
    }
    if (j.contains("tas")) {
        const json& t = j["tas"];
        check_keys(t, path + ".tas", {"cycle_ns", "window_ns", "hop_offset_ns"});
        topo.tas.cycle_ns = t.value("cycle_ns", topo.tas.cycle_ns);
        topo.tas.window_ns = t.value("window_ns", topo.tas.window_ns);
        topo.tas.hop_offset_ns = t.value("hop_offset_ns", topo.tas.hop_offset_ns);
    }
    if (j.contains("cbs")) {
        check_keys(j["cbs"], path + ".cbs", {"slope_factor"});
        topo.cbs.slope_factor = j["cbs"].value("slope_factor", topo.cbs.slope_factor);
    }
    if (j.contains("clock")) {
        const json& c = j["clock"];
        check_keys(c, path + ".clock", {"drift_ppm", "sync_interval_ns", "post_sync_offset_bound_ns"});
        topo.clock.drift_ppm = c.value("drift_ppm", topo.clock.drift_ppm);
        topo.clock.sync_interval_ns = c.value("sync_interval_ns", topo.clock.sync_interval_ns);
        topo.clock.post_sync_offset_bound_ns =
            c.value("post_sync_offset_bound_ns", topo.clock.post_sync_offset_bound_ns);
    }
    topo.switch_processing_ns = j.value("switch_processing_ns", topo.switch_processing_ns);
    topo.queue_bound_frames = j.value("queue_bound_frames", topo.queue_bound_frames);
    if (j.contains("pcp_class")) {
        for (auto it = j["pcp_class"].begin(); it != j["pcp_class"].end(); ++it) {
            int pcp = std::stoi(it.key());
            if (pcp < 0 || pcp > 7) fail(path + ".pcp_class", "pcp out of range: " + it.key());
            topo.pcp_class[pcp] = shaping_from_string(it->get<std::string>(), path + ".pcp_class");
        }
    }
    return topo;
}

CycleSpec parse_cycle(const json& j, const std::string& path) {
    CycleSpec c;
    check_keys(j, path, {"fixed_ns", "uniform_ns", "exponential_mean_ns"});
    if (j.contains("fixed_ns")) {
        c.kind = CycleSpec::Kind::Fixed;
        c.lo_ns = c.hi_ns = j["fixed_ns"].get<int64_t>();
    } else if (j.contains("uniform_ns")) {
        c.kind = CycleSpec::Kind::Uniform;
        const json& u = j["uniform_ns"];
        if (!u.is_array() || u.size() != 2) fail(path, "uniform_ns must be [lo, hi]");
        c.lo_ns = u[0].get<int64_t>();
        c.hi_ns = u[1].get<int64_t>();
    } else if (j.contains("exponential_mean_ns")) {
        c.kind = CycleSpec::Kind::Exponential;
        c.lo_ns = c.hi_ns = j["exponential_mean_ns"].get<int64_t>();
    } else {
        fail(path, "cycle needs fixed_ns, uniform_ns, or exponential_mean_ns");
    }
    return c;
}

StreamSpec parse_stream(const json& j, const std::string& path) {
    check_keys(j, path, {"id", "pcp", "source", "destinations", "frame_size", "cycle",
                         "start_offset_ns", "shaping_class", "redundant", "frer_elimination",
                         "transport", "vlan_id"});
    StreamSpec s;
    s.id = require(j, path, "id").get<std::string>();
    s.pcp = require(j, path, "pcp").get<int>();
    s.source = require(j, path, "source").get<std::string>();
    for (const auto& d : require(j, path, "destinations")) s.destinations.push_back(d.get<std::string>());
    s.frame_size = require(j, path, "frame_size").get<int>();
    s.cycle = parse_cycle(require(j, path, "cycle"), path + ".cycle");
    s.start_offset_ns = j.value("start_offset_ns", (int64_t)0);
    s.shaping_class = shaping_from_string(
        require(j, path, "shaping_class").get<std::string>(), path + ".shaping_class");
    s.redundant = j.value("redundant", false);
    if (j.contains("frer_elimination")) {
        std::string e = j["frer_elimination"].get<std::string>();
        if (e == "listener") s.frer_elimination = FrerEliminationPoint::Listener;
        else if (e == "last_switch") s.frer_elimination = FrerEliminationPoint::LastSwitch;
        else fail(path + ".frer_elimination", "unknown value '" + e + "'");
    }
    if (j.contains("transport")) {
        const json& t = j["transport"];
        check_keys(t, path + ".transport", {"kind", "dest_port"});
        std::string kind = require(t, path + ".transport", "kind").get<std::string>();
        if (kind == "udp_tunnel") {
            s.transport.kind = TransportSpec::Kind::UdpTunnel;
            s.transport.dest_port = require(t, path + ".transport", "dest_port").get<uint16_t>();
        } else if (kind == "raw") {
            s.transport.kind = TransportSpec::Kind::Raw;
        } else {
            fail(path + ".transport", "unknown transport kind '" + kind + "'");
        }
    }
    s.vlan_id = j.value("vlan_id", 1);
    return s;
}

int udp_tunnel_frame_size(int payload_bytes) {
    // eth(14) + vlan(4) + ipv4(20) + udp(8) + payload, 64-byte minimum
    return std::max(64, 14 + 4 + 20 + 8 + payload_bytes);
}

std::vector<StreamSpec> expand_matrix(const json& j, const std::string& path,
                                      const ResourceResolver& resolver) {
    check_keys(j, path, {"matrix_file", "pcp", "shaping_class", "udp_dst_base", "vlan_id"});
    std::string file = require(j, path, "matrix_file").get<std::string>();
    if (!resolver) fail(path, "no resolver available for matrix file '" + file + "'");
    auto text = resolver(file);
    if (!text) fail(path, "cannot resolve matrix file '" + file + "'");

    int pcp = j.value("pcp", 4);
    ShapingClass cls = j.contains("shaping_class")
                           ? shaping_from_string(j["shaping_class"].get<std::string>(), path)
                           : ShapingClass::StrictPriority;
    int udp_base = j.value("udp_dst_base", 5000);
    int vlan_id = j.value("vlan_id", 1);

    std::vector<StreamSpec> out;
    std::istringstream in(*text);
    std::string line;
    bool header = true;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {  // column header line
            header = false;
            continue;
        }
        std::istringstream ls(line);
        std::string id, source, dests, cycle_s, payload_s;
        if (!std::getline(ls, id, ',') || !std::getline(ls, source, ',') ||
            !std::getline(ls, dests, ',') || !std::getline(ls, cycle_s, ',') ||
            !std::getline(ls, payload_s, ','))
            fail(path, file + ": malformed matrix row " + std::to_string(row + 1));
        StreamSpec s;
        s.id = id;
        s.pcp = pcp;
        s.source = source;
        std::istringstream ds(dests);
        std::string d;
        while (std::getline(ds, d, ';')) s.destinations.push_back(d);
        s.cycle.kind = CycleSpec::Kind::Fixed;
        s.cycle.lo_ns = s.cycle.hi_ns = std::stoll(cycle_s);
        s.frame_size = udp_tunnel_frame_size(std::stoi(payload_s));
        s.shaping_class = cls;
        s.transport.kind = TransportSpec::Kind::UdpTunnel;
        s.transport.dest_port = (uint16_t)(udp_base + row);
        s.vlan_id = vlan_id;
        out.push_back(std::move(s));
        ++row;
    }
    return out;
}

StreamFilter parse_filter(const json& j, const std::string& path) {
    check_keys(j, path, {"iface", "vlan", "pcp", "dst_mac", "udp_dst", "direction"});
    StreamFilter f;
    if (j.contains("iface")) f.iface = j["iface"].get<std::string>();
    if (j.contains("vlan")) f.vlan = j["vlan"].get<int>();
    if (j.contains("pcp")) f.pcp = j["pcp"].get<int>();
    if (j.contains("dst_mac")) f.dst_mac = j["dst_mac"].get<std::string>();
    if (j.contains("udp_dst")) f.udp_dst = j["udp_dst"].get<uint16_t>();
    if (j.contains("direction"))
        f.direction = direction_from_string(j["direction"].get<std::string>(), path);
    return f;
}

PortRef parse_port_ref(const json& j, const std::string& path, Direction dflt) {
    check_keys(j, path, {"node", "port", "direction"});
    PortRef r;
    r.node = require(j, path, "node").get<std::string>();
    r.port = require(j, path, "port").get<std::string>();
    r.direction = j.contains("direction")
                      ? direction_from_string(j["direction"].get<std::string>(), path)
                      : dflt;
    return r;
}

AnomalyConfig parse_anomaly(const json& j, const std::string& path) {
    check_keys(j, path, {"id", "kind", "location", "target", "phase", "probability",
                         "min_clearance_ns", "params"});
    AnomalyConfig a;
    a.id = require(j, path, "id").get<std::string>();
    a.kind = anomaly_kind_from_string(require(j, path, "kind").get<std::string>(), path);
    a.location = parse_port_ref(require(j, path, "location"), path + ".location", Direction::Out);
    if (j.contains("target")) a.target = parse_filter(j["target"], path + ".target");
    const json& ph = require(j, path, "phase");
    check_keys(ph, path + ".phase", {"start_ns", "active_ns", "inactive_ns", "label"});
    a.phase.start_ns = ph.value("start_ns", (int64_t)0);
    a.phase.active_ns = require(ph, path + ".phase", "active_ns").get<int64_t>();
    a.phase.inactive_ns = require(ph, path + ".phase", "inactive_ns").get<int64_t>();
    a.phase.label = ph.value("label", a.id);
    a.probability = j.value("probability", 1.0);
    a.min_clearance_ns = j.value("min_clearance_ns", (int64_t)0);
    if (j.contains("params")) {
        const json& p = j["params"];
        check_keys(p, path + ".params", {"delay_ns", "inject_period_ns", "inject_payload_bytes",
                                         "inject_payload_fill", "manipulate_offset",
                                         "manipulate_length", "manipulate_value",
                                         "reorder_displacement"});
        a.params.delay_ns = p.value("delay_ns", (int64_t)0);
        a.params.inject_period_ns = p.value("inject_period_ns", (int64_t)0);
        a.params.inject_payload_bytes = p.value("inject_payload_bytes", 8);
        a.params.inject_payload_fill = (uint8_t)p.value("inject_payload_fill", 0);
        a.params.manipulate_offset = p.value("manipulate_offset", 0);
        a.params.manipulate_length = p.value("manipulate_length", 0);
        a.params.manipulate_value = (uint8_t)p.value("manipulate_value", 0);
        a.params.reorder_displacement = p.value("reorder_displacement", 1);
    }
    return a;
}

json scenario_to_json(const ScenarioConfig& cfg);

ScenarioConfig build_config(const json& doc, const ResourceResolver& resolver) {
    check_keys(doc, "", {"name", "base", "duration_ns", "seed", "topology", "streams",
                         "anomalies", "capture_points"});
    ScenarioConfig cfg;
    cfg.name = require(doc, "", "name").get<std::string>();
    cfg.duration_ns = require(doc, "", "duration_ns").get<int64_t>();
    cfg.seed = require(doc, "", "seed").get<uint64_t>();
    cfg.topology = parse_topology(require(doc, "", "topology"), "topology");
    int idx = 0;
    if (doc.contains("streams")) {
        for (const auto& s : doc["streams"]) {
            std::string p = "streams[" + std::to_string(idx++) + "]";
            if (s.contains("matrix_file")) {
                for (auto& ms : expand_matrix(s, p, resolver)) cfg.streams.push_back(std::move(ms));
            } else {
                cfg.streams.push_back(parse_stream(s, p));
            }
        }
    }
    idx = 0;
    if (doc.contains("anomalies"))
        for (const auto& a : doc["anomalies"])
            cfg.anomalies.push_back(parse_anomaly(a, "anomalies[" + std::to_string(idx++) + "]"));
    idx = 0;
    if (doc.contains("capture_points"))
        for (const auto& c : doc["capture_points"])
            cfg.capture_points.push_back(
                parse_port_ref(c, "capture_points[" + std::to_string(idx++) + "]", Direction::In));

    for (auto& s : cfg.streams)
        s.resolved_destinations = expand_destinations(s.destinations, cfg.topology, s.source);
    return cfg;
}

json resolve_inheritance(const json& doc, const ResourceResolver& resolver,
                         std::vector<std::string>& chain) {
    if (!doc.is_object() || !doc.contains("base") || doc["base"].is_null()) return doc;
    std::string base = doc["base"].get<std::string>();
    if (std::find(chain.begin(), chain.end(), base) != chain.end())
        fail("base", "inheritance cycle through '" + base + "'");
    if (!resolver) fail("base", "no resolver available for base '" + base + "'");
    auto text = resolver(base);
    if (!text) fail("base", "unresolvable base reference '" + base + "'");
    chain.push_back(base);
    json parent;
    try {
        parent = json::parse(*text);
    } catch (const json::parse_error& e) {
        fail("base", "syntax error in '" + base + "': " + e.what());
    }
    parent = resolve_inheritance(parent, resolver, chain);
    json merged = merge_configs(parent, doc);
    merged.erase("base");
    merged["base"] = doc["base"];
    return merged;
}

json scenario_to_json(const ScenarioConfig& cfg) {
    json doc;
    doc["name"] = cfg.name;
    doc["duration_ns"] = cfg.duration_ns;
    doc["seed"] = cfg.seed;
    json topo;
    topo["nodes"] = json::array();
    for (const auto& n : cfg.topology.nodes)
        topo["nodes"].push_back({{"name", n.name},
                                 {"kind", n.kind == NodeKind::Switch ? "switch" : "endpoint"}});
    topo["links"] = json::array();
    for (const auto& l : cfg.topology.links)
        topo["links"].push_back({{"a", l.node_a + "." + l.port_a},
                                 {"b", l.node_b + "." + l.port_b},
                                 {"rate_bps", l.rate_bps},
                                 {"propagation_delay_ns", l.propagation_delay_ns}});
    topo["tas"] = {{"cycle_ns", cfg.topology.tas.cycle_ns},
                   {"window_ns", cfg.topology.tas.window_ns},
                   {"hop_offset_ns", cfg.topology.tas.hop_offset_ns}};
    topo["cbs"] = {{"slope_factor", cfg.topology.cbs.slope_factor}};
    topo["clock"] = {{"drift_ppm", cfg.topology.clock.drift_ppm},
                     {"sync_interval_ns", cfg.topology.clock.sync_interval_ns},
                     {"post_sync_offset_bound_ns", cfg.topology.clock.post_sync_offset_bound_ns}};
    topo["switch_processing_ns"] = cfg.topology.switch_processing_ns;
    topo["queue_bound_frames"] = cfg.topology.queue_bound_frames;
    json pc;
    for (int p = 0; p < 8; ++p) pc[std::to_string(p)] = shaping_to_string(cfg.topology.pcp_class[p]);
    topo["pcp_class"] = pc;
    doc["topology"] = topo;

    doc["streams"] = json::array();
    for (const auto& s : cfg.streams) {
        json js;
        js["id"] = s.id;
        js["pcp"] = s.pcp;
        js["source"] = s.source;
        js["destinations"] = s.destinations;
        js["frame_size"] = s.frame_size;
        switch (s.cycle.kind) {
            case CycleSpec::Kind::Fixed: js["cycle"] = {{"fixed_ns", s.cycle.lo_ns}}; break;
            case CycleSpec::Kind::Uniform:
                js["cycle"] = {{"uniform_ns", {s.cycle.lo_ns, s.cycle.hi_ns}}};
                break;
            case CycleSpec::Kind::Exponential:
                js["cycle"] = {{"exponential_mean_ns", s.cycle.lo_ns}};
                break;
        }
        js["start_offset_ns"] = s.start_offset_ns;
        js["shaping_class"] = shaping_to_string(s.shaping_class);
        js["redundant"] = s.redundant;
        js["frer_elimination"] =
            s.frer_elimination == FrerEliminationPoint::LastSwitch ? "last_switch" : "listener";
        if (s.transport.kind == TransportSpec::Kind::UdpTunnel)
            js["transport"] = {{"kind", "udp_tunnel"}, {"dest_port", s.transport.dest_port}};
        else
            js["transport"] = {{"kind", "raw"}};
        js["vlan_id"] = s.vlan_id;
        doc["streams"].push_back(std::move(js));
    }

    doc["anomalies"] = json::array();
    for (const auto& a : cfg.anomalies) {
        json ja;
        ja["id"] = a.id;
        ja["kind"] = anomaly_kind_to_string(a.kind);
        ja["location"] = {{"node", a.location.node},
                          {"port", a.location.port},
                          {"direction", direction_to_string(a.location.direction)}};
        json t;
        if (a.target.iface) t["iface"] = *a.target.iface;
        if (a.target.vlan) t["vlan"] = *a.target.vlan;
        if (a.target.pcp) t["pcp"] = *a.target.pcp;
        if (a.target.dst_mac) t["dst_mac"] = *a.target.dst_mac;
        if (a.target.udp_dst) t["udp_dst"] = *a.target.udp_dst;
        t["direction"] = direction_to_string(a.target.direction);
        ja["target"] = t;
        ja["phase"] = {{"start_ns", a.phase.start_ns},
                       {"active_ns", a.phase.active_ns},
                       {"inactive_ns", a.phase.inactive_ns},
                       {"label", a.phase.label}};
        ja["probability"] = a.probability;
        ja["min_clearance_ns"] = a.min_clearance_ns;
        ja["params"] = {{"delay_ns", a.params.delay_ns},
                        {"inject_period_ns", a.params.inject_period_ns},
                        {"inject_payload_bytes", a.params.inject_payload_bytes},
                        {"inject_payload_fill", a.params.inject_payload_fill},
                        {"manipulate_offset", a.params.manipulate_offset},
                        {"manipulate_length", a.params.manipulate_length},
                        {"manipulate_value", a.params.manipulate_value},
                        {"reorder_displacement", a.params.reorder_displacement}};
        doc["anomalies"].push_back(std::move(ja));
    }

    doc["capture_points"] = json::array();
    for (const auto& c : cfg.capture_points)
        doc["capture_points"].push_back({{"node", c.node},
                                         {"port", c.port},
                                         {"direction", direction_to_string(c.direction)}});
    return doc;
}

}  // namespace

const NodeSpec* Topology::find_node(const std::string& name) const {
    for (const auto& n : nodes)
        if (n.name == name) return &n;
    return nullptr;
}

bool Topology::has_port(const std::string& node, const std::string& port) const {
    for (const auto& l : links) {
        if (l.node_a == node && l.port_a == port) return true;
        if (l.node_b == node && l.port_b == port) return true;
    }
    return false;
}

const StreamSpec* ScenarioConfig::find_stream(const std::string& id) const {
    for (const auto& s : streams)
        if (s.id == id) return &s;
    return nullptr;
}

std::vector<std::string> expand_destinations(const std::vector<std::string>& patterns,
                                             const Topology& topo,
                                             const std::string& source) {
    std::vector<std::string> out;
    auto add = [&](const std::string& name) {
        if (name != source && std::find(out.begin(), out.end(), name) == out.end())
            out.push_back(name);
    };
    for (const auto& pat : patterns) {
        auto star = pat.find('*');
        if (star == std::string::npos) {
            add(pat);
            continue;
        }
        std::string prefix = pat.substr(0, star);
        for (const auto& n : topo.nodes) {
            if (n.kind != NodeKind::Endpoint) continue;
            if (n.name.size() >= prefix.size() && n.name.compare(0, prefix.size(), prefix) == 0)
                add(n.name);
        }
    }
    return out;
}

ScenarioConfig parse_scenario(const std::string& text, const ResourceResolver& resolver) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("syntax error: ") + e.what());
    }
    std::vector<std::string> chain;
    if (doc.is_object() && doc.contains("name") && !doc["name"].is_null())
        chain.push_back(doc["name"].get<std::string>());
    json resolved = resolve_inheritance(doc, resolver, chain);
    ScenarioConfig cfg = build_config(resolved, resolver);
    if (doc.contains("base") && !doc["base"].is_null()) cfg.base = doc["base"].get<std::string>();
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    namespace fs = std::filesystem;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    fs::path dir = fs::path(path).parent_path();
    ResourceResolver resolver = [dir](const std::string& name) -> std::optional<std::string> {
        fs::path p = dir / name;
        if (!fs::exists(p)) p = dir / (name + ".json");
        if (!fs::exists(p)) return std::nullopt;
        std::ifstream f(p, std::ios::binary);
        std::stringstream fss;
        fss << f.rdbuf();
        return fss.str();
    };
    return parse_scenario(ss.str(), resolver);
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
    return scenario_to_json(cfg).dump(2);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return scenario_to_json(a) == scenario_to_json(b);
}

ValidationReport validate_scenario(const ScenarioConfig& cfg) {
    ValidationReport rep;
    auto err = [&](std::string path, std::string msg) {
        rep.errors.push_back({std::move(path), std::move(msg)});
    };
    auto warn = [&](std::string path, std::string msg) {
        rep.warnings.push_back({std::move(path), std::move(msg)});
    };

    if (cfg.duration_ns <= 0) err("duration_ns", "duration must be positive");

    std::set<std::string> node_names;
    for (const auto& n : cfg.topology.nodes)
        if (!node_names.insert(n.name).second)
            err("topology.nodes", "duplicate node name '" + n.name + "'");

    std::set<std::string> ports;
    int li = 0;
    for (const auto& l : cfg.topology.links) {
        std::string p = "topology.links[" + std::to_string(li++) + "]";
        for (const auto* end : {&l.node_a, &l.node_b})
            if (!node_names.count(*end)) err(p, "unknown node '" + *end + "'");
        for (const auto& ref : {l.node_a + "." + l.port_a, l.node_b + "." + l.port_b})
            if (!ports.insert(ref).second) err(p, "port '" + ref + "' appears in more than one link");
        if (l.rate_bps <= 0) err(p, "link rate must be positive");
    }

    std::set<std::string> stream_ids;
    int si = 0;
    for (const auto& s : cfg.streams) {
        std::string p = "streams[" + std::to_string(si++) + "] (" + s.id + ")";
        if (!stream_ids.insert(s.id).second) err(p, "duplicate stream id");
        if (s.pcp < 0 || s.pcp > 7) err(p, "pcp must be in 0..7");
        if (!node_names.count(s.source)) err(p, "source references unknown node '" + s.source + "'");
        if (s.resolved_destinations.empty())
            err(p, "destinations resolve to no nodes");
        for (const auto& d : s.resolved_destinations)
            if (!node_names.count(d)) err(p, "destination references unknown node '" + d + "'");
        if (s.frame_size < 64)
            err(p, "frame_size " + std::to_string(s.frame_size) +
                       " below the 64-byte Ethernet minimum");
        if (s.frame_size > 1522) err(p, "frame_size above the 1522-byte Ethernet maximum");
        if (s.cycle.lo_ns > s.cycle.hi_ns) err(p, "cycle lo must be <= hi");
        if (s.cycle.lo_ns <= 0) err(p, "cycle must be positive");
        if (s.pcp >= 0 && s.pcp <= 7 &&
            cfg.topology.pcp_class[s.pcp] != s.shaping_class)
            err(p, "shaping_class inconsistent with topology pcp_class for pcp " +
                       std::to_string(s.pcp));
    }

    int ai = 0;
    for (const auto& a : cfg.anomalies) {
        std::string p = "anomalies[" + std::to_string(ai++) + "] (" + a.id + ")";
        if (!node_names.count(a.location.node))
            err(p, "location references unknown node '" + a.location.node + "'");
        else if (!cfg.topology.has_port(a.location.node, a.location.port))
            err(p, "location references unknown port '" + a.location.port + "'");
        if (a.probability < 0.0 || a.probability > 1.0) err(p, "probability must be in [0,1]");
        if (a.min_clearance_ns < 0) err(p, "min_clearance must be >= 0");
        if (a.phase.active_ns <= 0) err(p, "phase active duration must be positive");
        switch (a.kind) {
            case AnomalyKind::Delay:
                if (a.params.delay_ns <= 0) err(p, "delay kind requires params.delay_ns > 0");
                break;
            case AnomalyKind::Inject:
                if (a.params.inject_period_ns <= 0)
                    err(p, "inject kind requires params.inject_period_ns > 0");
                if (!a.target.udp_dst && !a.target.pcp && !a.target.dst_mac)
                    err(p, "inject kind requires a target identifying the template stream");
                break;
            case AnomalyKind::Manipulate:
                if (a.params.manipulate_length <= 0)
                    err(p, "manipulate kind requires params.manipulate_length > 0");
                break;
            case AnomalyKind::Reorder:
                if (a.params.reorder_displacement < 1)
                    err(p, "reorder displacement must be >= 1");
                break;
            case AnomalyKind::Eliminate:
                break;
        }
    }

    int ci = 0;
    for (const auto& c : cfg.capture_points) {
        std::string p = "capture_points[" + std::to_string(ci++) + "]";
        if (!node_names.count(c.node)) err(p, "unknown node '" + c.node + "'");
        else if (!cfg.topology.has_port(c.node, c.port))
            err(p, "unknown port '" + c.port + "' on node '" + c.node + "'");
    }

    if (cfg.streams.empty()) warn("streams", "scenario generates no traffic");
    rep.resolved_stream_count = (int)cfg.streams.size();
    return rep;
}

}  // namespace nadsim
