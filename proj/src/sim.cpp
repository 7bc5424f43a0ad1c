#include "nadsim/sim.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <sstream>

#include "nadsim/clock.hpp"
#include "nadsim/rng.hpp"
#include "nadsim/shaping.hpp"

namespace nadsim {

namespace {

struct TreeEdge {
    int port = -1;
    int depth = 0;      // talker egress = 0, k-th switch egress = k
    int terminals = 1;  // (listener, variant) endpoints downstream of this edge
};

struct Route {
    // variant 1: one multicast tree, egress edges per node
    std::vector<std::vector<TreeEdge>> egress;  // indexed by node
    std::vector<char> deliver_here;             // indexed by node
    // variant 2 (redundant streams): one explicit path per protected listener
    struct Path {
        int listener = -1;
        std::vector<TreeEdge> hops;
    };
    std::vector<Path> alt_paths;
};

struct PacketRec {
    int stream = -1;
    uint64_t seq = 0;
    TimeNs created = 0;
    bool injected = false;
};

struct Instance {
    std::shared_ptr<PacketRec> pkt;
    FrameBytes frame;
    PacketLabel label = PacketLabel::Benign;
    std::string phase_label;
    int variant = 1;
    int path_idx = -1;  // variant 2: index into alt_paths
    int path_pos = 0;   // variant 2: next hop index
    TimeNs ready = 0;
    bool shaping_exempt = false;  // set by timing anomalies at their port
    bool anomaly_checked = false;
    int hold = 0;  // reorder: packets still to let pass
    int terminals = 1;
};

using InstPtr = std::shared_ptr<Instance>;

struct Port {
    int node = -1;
    std::string name;
    int peer_port = -1;
    int64_t rate_bps = 0;
    TimeNs prop_ns = 0;

    std::deque<InstPtr> q[8];
    std::vector<InstPtr> held;
    int qlen = 0;
    // min: generation can start marginally before t=0 on fast local clocks
    TimeNs busy_until = std::numeric_limits<TimeNs>::min();
    uint64_t sel_gen = 0;

    GateSchedule sched;
    bool has_gate = false;
    CreditState credit[8];
    bool shaped[8] = {};

    int out_capture = -1;
    int in_capture = -1;
    std::vector<int> anomaly_idx;
};

enum class Ev { Generate, PortSel, TxEnd, Arrive, Inject };

struct Event {
    TimeNs t = 0;
    int node = 0;
    uint64_t order = 0;
    Ev kind = Ev::Generate;
    int a = 0;  // stream / port / anomaly index
    uint64_t b = 0;  // selection generation / grid index
    InstPtr inst;
};

struct EventCmp {
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t > y.t;
        if (x.node != y.node) return x.node > y.node;
        return x.order > y.order;
    }
};

struct StreamRt {
    const StreamSpec* spec = nullptr;
    int index = -1;
    int src_node = -1;
    Route route;
    int total_terminals = 0;
    FrameBytes template_frame;
    FrameBytes snap_frame;
    ParsedFrame parsed;
    Rng rng{0};
    TimeNs next_local = 0;
    uint64_t next_seq = 0;
    bool timed = false;
    bool shaped = false;
    std::map<int, int> listener_stats;  // listener node -> index into stats.listeners
};

struct InjectRt {
    int port = -1;
    int stream = -1;
    int terminals = 1;
    FrameBytes frame;
    FrameBytes snap;
};

TimeNs tx_duration(int64_t bytes, int64_t rate_bps) {
    return (TimeNs)((bytes * 8 * 1'000'000'000LL + rate_bps - 1) / rate_bps);
}

double mean_cycle_ns(const CycleSpec& c) {
    switch (c.kind) {
        case CycleSpec::Kind::Uniform: return 0.5 * (double)(c.lo_ns + c.hi_ns);
        default: return (double)c.lo_ns;
    }
}

class Simulator {
public:
    explicit Simulator(const ScenarioConfig& cfg) : cfg_(cfg) {}

    SimResult run();

private:
    const ScenarioConfig& cfg_;
    std::vector<ClockModel> clocks_;
    std::vector<NodeKind> node_kind_;
    std::vector<std::string> node_name_;
    std::map<std::string, int> node_index_;
    std::vector<Port> ports_;
    std::map<std::pair<int, std::string>, int> port_index_;  // (node, port name)
    std::vector<std::vector<int>> node_ports_;               // config link order

    std::vector<StreamRt> streams_;
    std::vector<AnomalyRuntime> anomalies_;
    std::vector<std::set<int>> recover_pending_;  // per anomaly: stream indices
    std::vector<InjectRt> injectors_;             // parallel to cfg_.anomalies

    std::map<std::pair<int, int>, RecoveryState> recovery_;  // (stream, listener node)

    std::priority_queue<Event, std::vector<Event>, EventCmp> heap_;
    uint64_t next_order_ = 0;
    TimeNs sim_now_ = 0;

    SimResult result_;
    std::map<const std::vector<uint8_t>*, FrameBytes> snap_cache_;

    void build_topology();
    void build_routes();
    void build_schedules();
    void build_anomalies();
    void prime_generation();

    int find_bfs_path(int src, int dst, const std::set<std::pair<int, int>>& banned,
                      std::vector<int>& out_nodes) const;
    std::vector<TreeEdge> path_ports(const std::vector<int>& nodes) const;

    void push(Event e) {
        e.order = next_order_++;
        heap_.push(std::move(e));
    }

    void enqueue(int pi, InstPtr inst, TimeNs ready, TimeNs now);
    void schedule_port(int pi, TimeNs now);
    std::optional<std::pair<TimeNs, int>> best_start(int pi, TimeNs now);
    void transmit(int pi, int pcp, TimeNs t);
    void on_arrive(int pi, InstPtr inst, TimeNs t);
    void deliver(int node, InstPtr& inst, TimeNs t);
    void generate(int si, TimeNs t);
    void inject(int ai, uint64_t k, TimeNs t);
    void record_capture(int cap, int node, TimeNs true_t, Instance& inst);
    FrameBytes snapped(const FrameBytes& frame);
    std::string port_iface(int pi) const {
        return node_name_[ports_[pi].node] + "-" + ports_[pi].name;
    }
    TimeNs stream_tx(const Instance& inst, int64_t rate) const {
        return tx_duration((int64_t)inst.frame->size(), rate);
    }
    int instance_pcp(const Instance& inst) const {
        return streams_[inst.pkt->stream].spec->pcp;
    }
};

void Simulator::build_topology() {
    int idx = 0;
    for (const auto& n : cfg_.topology.nodes) {
        node_index_[n.name] = idx++;
        node_kind_.push_back(n.kind);
        node_name_.push_back(n.name);
        clocks_.emplace_back(cfg_.topology.clock, cfg_.seed, n.name);
    }
    node_ports_.resize(node_index_.size());
    for (const auto& l : cfg_.topology.links) {
        int na = node_index_.at(l.node_a);
        int nb = node_index_.at(l.node_b);
        int pa = (int)ports_.size();
        int pb = pa + 1;
        Port a, b;
        a.node = na;
        a.name = l.port_a;
        a.peer_port = pb;
        a.rate_bps = l.rate_bps;
        a.prop_ns = l.propagation_delay_ns;
        b.node = nb;
        b.name = l.port_b;
        b.peer_port = pa;
        b.rate_bps = l.rate_bps;
        b.prop_ns = l.propagation_delay_ns;
        ports_.push_back(std::move(a));
        ports_.push_back(std::move(b));
        port_index_[{na, l.port_a}] = pa;
        port_index_[{nb, l.port_b}] = pb;
        node_ports_[na].push_back(pa);
        node_ports_[nb].push_back(pb);
    }
    for (auto& p : ports_) p.sched.cycle_ns = cfg_.topology.tas.cycle_ns;

    int ci = 0;
    for (const auto& cp : cfg_.capture_points) {
        auto it = port_index_.find({node_index_.at(cp.node), cp.port});
        if (it == port_index_.end()) throw SimError("capture point references unknown port");
        CapturePointData data;
        data.link_speed_bps = ports_[it->second].rate_bps;
        std::string dir = cp.direction == Direction::Out ? "out" : "in";
        data.interface_name = cp.node + "-" + cp.port + "-" + dir;
        result_.captures.points.push_back(std::move(data));
        if (cp.direction == Direction::In || cp.direction == Direction::Both)
            ports_[it->second].in_capture = ci;
        if (cp.direction == Direction::Out || cp.direction == Direction::Both)
            ports_[it->second].out_capture = ci;
        result_.stats.capture_points.push_back({result_.captures.points[ci].interface_name, 0});
        ++ci;
    }
}

// BFS from src to dst over links, never expanding through endpoint nodes.
// Neighbor order follows link declaration order so tie-breaks are stable.
// Links in `banned` (as unordered node pairs) are skipped. Returns path length
// in switch hops, or -1.
int Simulator::find_bfs_path(int src, int dst, const std::set<std::pair<int, int>>& banned,
                             std::vector<int>& out_nodes) const {
    std::vector<int> parent(node_name_.size(), -1);
    std::vector<char> seen(node_name_.size(), 0);
    std::deque<int> work;
    seen[src] = 1;
    work.push_back(src);
    while (!work.empty()) {
        int n = work.front();
        work.pop_front();
        if (n == dst) break;
        if (n != src && node_kind_[n] == NodeKind::Endpoint) continue;
        for (int pi : node_ports_[n]) {
            int peer = ports_[ports_[pi].peer_port].node;
            auto key = std::minmax(n, peer);
            if (banned.count({key.first, key.second})) continue;
            if (seen[peer]) continue;
            seen[peer] = 1;
            parent[peer] = n;
            work.push_back(peer);
        }
    }
    if (!seen[dst]) return -1;
    out_nodes.clear();
    for (int n = dst; n != -1; n = parent[n]) out_nodes.push_back(n);
    std::reverse(out_nodes.begin(), out_nodes.end());
    return (int)out_nodes.size() - 2;  // switches between the two endpoints
}

std::vector<TreeEdge> Simulator::path_ports(const std::vector<int>& nodes) const {
    std::vector<TreeEdge> hops;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        int from = nodes[i];
        int to = nodes[i + 1];
        int found = -1;
        for (int pi : node_ports_[from])
            if (ports_[ports_[pi].peer_port].node == to) {
                found = pi;
                break;
            }
        if (found < 0) throw SimError("route through nonexistent link");
        hops.push_back({found, (int)i, 1});
    }
    return hops;
}

void Simulator::build_routes() {
    int si = 0;
    for (const auto& spec : cfg_.streams) {
        StreamRt rt;
        rt.spec = &spec;
        rt.index = si;
        rt.src_node = node_index_.at(spec.source);
        rt.timed = spec.shaping_class == ShapingClass::Timed;
        rt.shaped = spec.shaping_class == ShapingClass::Shaped;
        rt.rng = Rng::substream(cfg_.seed, "cycle:" + spec.id);
        rt.template_frame = build_frame(spec, rt.src_node, 0);
        auto parsed = parse_frame(*rt.template_frame);
        if (!parsed) throw SimError("stream " + spec.id + " builds an unparsable frame");
        rt.parsed = *parsed;

        rt.route.egress.resize(node_name_.size());
        rt.route.deliver_here.assign(node_name_.size(), 0);

        std::set<std::pair<int, int>> no_ban;
        std::vector<std::vector<int>> primary_paths;
        for (const auto& dname : spec.resolved_destinations) {
            int dst = node_index_.at(dname);
            std::vector<int> nodes;
            if (find_bfs_path(rt.src_node, dst, no_ban, nodes) < 0)
                throw SimError("stream " + spec.id + " has no path to " + dname);
            primary_paths.push_back(nodes);
            rt.route.deliver_here[dst] = 1;
            rt.total_terminals += 1;

            if (spec.redundant) {
                // ban the primary path's inter-switch links and look for a
                // disjoint alternative
                std::set<std::pair<int, int>> banned;
                for (size_t i = 0; i + 1 < nodes.size(); ++i)
                    if (node_kind_[nodes[i]] != NodeKind::Endpoint &&
                        node_kind_[nodes[i + 1]] != NodeKind::Endpoint) {
                        auto key = std::minmax(nodes[i], nodes[i + 1]);
                        banned.insert({key.first, key.second});
                    }
                if (!banned.empty()) {
                    std::vector<int> alt;
                    if (find_bfs_path(rt.src_node, dst, banned, alt) >= 0) {
                        Route::Path p;
                        p.listener = dst;
                        p.hops = path_ports(alt);
                        rt.route.alt_paths.push_back(std::move(p));
                        rt.total_terminals += 1;
                    }
                }
            }
        }

        // merge primary paths into one tree; paths from a single BFS would
        // always agree, per-listener BFS runs agree on shared prefixes for
        // ring-like topologies and we verify rather than assume
        std::vector<int> tree_parent(node_name_.size(), -1);
        for (const auto& nodes : primary_paths) {
            for (size_t i = 0; i + 1 < nodes.size(); ++i) {
                int child = nodes[i + 1];
                if (tree_parent[child] != -1 && tree_parent[child] != nodes[i])
                    throw SimError("stream " + spec.id +
                                   " multicast paths diverge; topology unsupported");
                tree_parent[child] = nodes[i];
            }
        }
        for (const auto& nodes : primary_paths) {
            auto hops = path_ports(nodes);
            for (const auto& h : hops) {
                auto& eg = rt.route.egress[ports_[h.port].node];
                auto it = std::find_if(eg.begin(), eg.end(),
                                       [&](const TreeEdge& e) { return e.port == h.port; });
                if (it == eg.end())
                    eg.push_back(h);
                else
                    it->terminals += 1;
            }
        }

        for (const auto& dname : spec.resolved_destinations) {
            ListenerStats ls;
            ls.stream_id = spec.id;
            ls.listener = dname;
            rt.listener_stats[node_index_.at(dname)] = (int)result_.stats.listeners.size();
            result_.stats.listeners.push_back(std::move(ls));
        }
        streams_.push_back(std::move(rt));
        ++si;
    }
}

void Simulator::build_schedules() {
    const auto& tas = cfg_.topology.tas;
    auto add_window = [&](int pi, int pcp, TimeNs start_off) {
        Port& p = ports_[pi];
        TimeNs s = ((start_off % tas.cycle_ns) + tas.cycle_ns) % tas.cycle_ns;
        TimeNs e = s + tas.window_ns;
        if (e <= tas.cycle_ns) {
            p.sched.open[pcp].push_back({s, e});
        } else {
            p.sched.open[pcp].push_back({s, tas.cycle_ns});
            p.sched.open[pcp].push_back({0, e - tas.cycle_ns});
        }
        p.has_gate = true;
    };

    std::map<int, double> shaped_rate;  // port -> summed stream bit rate
    for (const auto& rt : streams_) {
        const auto& spec = *rt.spec;
        double rate = (double)spec.frame_size * 8.0 * 1e9 / mean_cycle_ns(spec.cycle);
        auto each_edge = [&](const TreeEdge& e) {
            if (rt.timed)
                add_window(e.port, spec.pcp,
                           spec.start_offset_ns + (TimeNs)e.depth * tas.hop_offset_ns);
            if (rt.shaped) shaped_rate[e.port] += rate;
        };
        for (const auto& eg : rt.route.egress)
            for (const auto& e : eg) each_edge(e);
        for (const auto& path : rt.route.alt_paths)
            for (const auto& e : path.hops) each_edge(e);
    }

    for (auto& p : ports_) {
        for (auto& open : p.sched.open) {
            std::sort(open.begin(), open.end(),
                      [](const GateSchedule::Interval& a, const GateSchedule::Interval& b) {
                          return a.start < b.start;
                      });
            // merge overlapping windows
            std::vector<GateSchedule::Interval> merged;
            for (const auto& iv : open) {
                if (!merged.empty() && iv.start <= merged.back().end)
                    merged.back().end = std::max(merged.back().end, iv.end);
                else
                    merged.push_back(iv);
            }
            open = std::move(merged);
        }
    }

    for (auto& [pi, rate] : shaped_rate) {
        Port& p = ports_[pi];
        int64_t idle = (int64_t)(rate * cfg_.topology.cbs.slope_factor);
        idle = std::min(idle, p.rate_bps * 98 / 100);
        for (const auto& rt : streams_) {
            if (!rt.shaped) continue;
            int pcp = rt.spec->pcp;
            if (!p.shaped[pcp]) {
                p.shaped[pcp] = true;
                p.credit[pcp] = make_credit_state(idle, p.rate_bps);
            }
        }
    }
}

void Simulator::build_anomalies() {
    recover_pending_.resize(cfg_.anomalies.size());
    injectors_.resize(cfg_.anomalies.size());
    int ai = 0;
    for (const auto& a : cfg_.anomalies) {
        AnomalyRuntime rt;
        rt.cfg = &a;
        rt.rng = Rng::substream(cfg_.seed, "anomaly:" + a.id);
        anomalies_.push_back(std::move(rt));

        auto it = port_index_.find({node_index_.at(a.location.node), a.location.port});
        if (it == port_index_.end()) throw SimError("anomaly location references unknown port");
        int pi = it->second;
        ports_[pi].anomaly_idx.push_back(ai);

        if (a.kind == AnomalyKind::Inject) {
            // resolve the template stream: must match the target filter and
            // route through the anomaly port
            InjectRt inj;
            inj.port = pi;
            std::string iface = port_iface(pi);
            for (const auto& rt2 : streams_) {
                if (!filter_matches(a.target, iface, Direction::Out, rt2.parsed)) continue;
                for (const auto& e : rt2.route.egress[ports_[pi].node]) {
                    if (e.port == pi) {
                        inj.stream = rt2.index;
                        inj.terminals = e.terminals;
                    }
                }
            }
            if (inj.stream < 0)
                throw SimError("inject anomaly " + a.id + " matches no stream at its port");
            auto frame = std::make_shared<std::vector<uint8_t>>(
                *streams_[inj.stream].template_frame);
            int payload_off = streams_[inj.stream].spec->transport.kind ==
                                      TransportSpec::Kind::UdpTunnel
                                  ? 46
                                  : 18;
            for (size_t i = payload_off; i < frame->size(); ++i)
                (*frame)[i] = a.params.inject_payload_fill;
            inj.frame = frame;
            injectors_[ai] = std::move(inj);

            TimeNs period = a.params.inject_period_ns;
            uint64_t k = 0;
            for (TimeNs t = a.phase.start_ns; t < cfg_.duration_ns; t += period, ++k) {
                if (!phase_active(a.phase, t)) continue;
                Event e;
                e.t = t;
                e.node = ports_[pi].node;
                e.kind = Ev::Inject;
                e.a = ai;
                e.b = k;
                push(std::move(e));
            }
        }
        ++ai;
    }
}

void Simulator::prime_generation() {
    for (auto& rt : streams_) {
        rt.next_local = rt.spec->start_offset_ns;
        // stagger untimed sources so they do not all fire at t=0 in lockstep
        if (!rt.timed && rt.spec->start_offset_ns == 0)
            rt.next_local = rt.rng.uniform_i64(0, std::max<TimeNs>(rt.spec->cycle.lo_ns - 1, 0));
        TimeNs t = clocks_[rt.src_node].true_time_for_local(rt.next_local);
        Event e;
        e.t = t;
        e.node = rt.src_node;
        e.kind = Ev::Generate;
        e.a = rt.index;
        push(std::move(e));
    }
}

FrameBytes Simulator::snapped(const FrameBytes& frame) {
    if ((int)frame->size() <= kCaptureSnapLength) return frame;
    auto it = snap_cache_.find(frame.get());
    if (it != snap_cache_.end()) return it->second;
    auto cut = std::make_shared<std::vector<uint8_t>>(frame->begin(),
                                                      frame->begin() + kCaptureSnapLength);
    snap_cache_.emplace(frame.get(), cut);
    return cut;
}

void Simulator::record_capture(int cap, int node, TimeNs true_t, Instance& inst) {
    LabeledPacket pkt;
    pkt.ts = clocks_[node].local_time(true_t);
    pkt.frame = snapped(inst.frame);
    pkt.wire_length = (int)inst.frame->size();
    if (pkt.wire_length == (int)pkt.frame->size()) pkt.wire_length = 0;
    pkt.labels.packet_label = inst.label;
    pkt.labels.phase_label = inst.phase_label;
    result_.captures.points[cap].packets.push_back(std::move(pkt));
    result_.stats.capture_points[cap].packet_count += 1;
}

void Simulator::enqueue(int pi, InstPtr inst, TimeNs ready, TimeNs now) {
    Port& p = ports_[pi];
    int pcp = instance_pcp(*inst);
    if (p.qlen >= cfg_.topology.queue_bound_frames) {
        result_.stats.queue_dropped_terminals += inst->terminals;
        return;
    }
    inst->ready = ready;
    if (p.shaped[pcp] && p.q[pcp].empty())
        p.credit[pcp] = cbs_idle_update(p.credit[pcp], now, true);
    p.q[pcp].push_back(std::move(inst));
    p.qlen += 1;
    schedule_port(pi, now);
}

std::optional<std::pair<TimeNs, int>> Simulator::best_start(int pi, TimeNs now) {
    Port& p = ports_[pi];
    const ClockModel& clock = clocks_[p.node];
    std::optional<std::pair<TimeNs, int>> best;
    for (int pcp = 7; pcp >= 0; --pcp) {
        if (p.q[pcp].empty()) continue;
        const Instance& head = *p.q[pcp].front();
        TimeNs ready = std::max(now, head.ready);
        TimeNs tx = stream_tx(head, p.rate_bps);
        TimeNs start;
        const StreamRt& srt = streams_[head.pkt->stream];
        if (head.shaping_exempt) {
            start = ready;
        } else if (srt.timed && p.sched.gated(pcp)) {
            TimeNs lready = clock.local_time(ready);
            TimeNs lstart;
            try {
                lstart = tas_gate_transmit_time(p.sched, pcp, lready, tx);
            } catch (const UnschedulableError&) {
                throw SimError("stream " + srt.spec->id + " unschedulable on " + port_iface(pi));
            }
            start = lstart == lready ? ready : clock.true_time_for_local(lstart);
        } else if (p.shaped[pcp]) {
            auto [t0, st] = cbs_transmit_time(p.credit[pcp], ready, tx);
            (void)st;
            start = t0;
            if (p.has_gate) {
                TimeNs lstart = guard_transmit_time(p.sched, pcp, clock.local_time(start), tx);
                if (lstart != clock.local_time(start)) start = clock.true_time_for_local(lstart);
            }
        } else {
            start = ready;
            if (p.has_gate) {
                TimeNs lstart = guard_transmit_time(p.sched, pcp, clock.local_time(start), tx);
                if (lstart != clock.local_time(start)) start = clock.true_time_for_local(lstart);
            }
        }
        if (!best || start < best->first) best = {{start, pcp}};
    }
    return best;
}

void Simulator::schedule_port(int pi, TimeNs now) {
    Port& p = ports_[pi];
    if (p.busy_until > now) return;  // TxEnd re-schedules
    if (p.qlen == 0) return;
    auto best = best_start(pi, now);
    if (!best) return;
    Event e;
    e.t = std::max(best->first, now);
    e.node = p.node;
    e.kind = Ev::PortSel;
    e.a = pi;
    e.b = ++p.sel_gen;
    push(std::move(e));
}

void Simulator::transmit(int pi, int pcp, TimeNs t) {
    Port& p = ports_[pi];
    InstPtr inst = p.q[pcp].front();
    StreamRt& srt = streams_[inst->pkt->stream];

    if (!inst->anomaly_checked && !p.anomaly_idx.empty()) {
        inst->anomaly_checked = true;
        std::string iface = port_iface(pi);
        for (int ai : p.anomaly_idx) {
            AnomalyRuntime& art = anomalies_[ai];
            const AnomalyConfig& ac = *art.cfg;
            if (!filter_matches(ac.target, iface, Direction::Out, srt.parsed)) continue;
            if (auto pl = phase_active(ac.phase, t)) inst->phase_label = *pl;
            if (decide_action(art, t)) {
                LedgerRow row{t, ac.id, ac.kind, srt.spec->id, inst->pkt->seq, ""};
                switch (ac.kind) {
                    case AnomalyKind::Delay:
                        inst->ready = t + ac.params.delay_ns;
                        inst->shaping_exempt = true;
                        inst->label = PacketLabel::Delayed;
                        row.action_detail = "delay_ns=" + std::to_string(ac.params.delay_ns);
                        result_.ledger.push_back(std::move(row));
                        recover_pending_[ai].insert(srt.index);
                        p.sel_gen++;  // invalidate the pending selection
                        schedule_port(pi, t);
                        return;
                    case AnomalyKind::Eliminate:
                        p.q[pcp].pop_front();
                        p.qlen -= 1;
                        result_.stats.anomaly_eliminated_terminals += inst->terminals;
                        row.action_detail = "terminals=" + std::to_string(inst->terminals);
                        result_.ledger.push_back(std::move(row));
                        recover_pending_[ai].insert(srt.index);
                        p.sel_gen++;
                        schedule_port(pi, t);
                        return;
                    case AnomalyKind::Reorder:
                        p.q[pcp].pop_front();
                        p.qlen -= 1;
                        inst->hold = ac.params.reorder_displacement;
                        inst->shaping_exempt = true;
                        inst->label = PacketLabel::Reordered;
                        row.action_detail =
                            "displacement=" + std::to_string(ac.params.reorder_displacement);
                        result_.ledger.push_back(std::move(row));
                        recover_pending_[ai].insert(srt.index);
                        p.held.push_back(std::move(inst));
                        p.sel_gen++;
                        schedule_port(pi, t);
                        return;
                    case AnomalyKind::Manipulate: {
                        auto copy = std::make_shared<std::vector<uint8_t>>(*inst->frame);
                        int changed = manipulate_bytes(*copy, ac.params.manipulate_offset,
                                                       ac.params.manipulate_length,
                                                       ac.params.manipulate_value);
                        inst->frame = std::move(copy);
                        inst->label = PacketLabel::Manipulated;
                        row.action_detail = "bytes=" + std::to_string(changed);
                        result_.ledger.push_back(std::move(row));
                        recover_pending_[ai].insert(srt.index);
                        break;  // still transmits
                    }
                    case AnomalyKind::Inject:
                        break;  // injections run on their own grid
                }
            } else if (inst->label == PacketLabel::Benign && !inst->pkt->injected &&
                       recover_pending_[ai].erase(srt.index)) {
                inst->label = PacketLabel::BenignRecovered;
            }
        }
    }

    p.q[pcp].pop_front();
    p.qlen -= 1;
    TimeNs tx = stream_tx(*inst, p.rate_bps);
    if (p.shaped[pcp]) {
        auto [s2, after] = cbs_transmit_time(p.credit[pcp], t, tx);
        (void)s2;
        p.credit[pcp] = after;
    }
    p.busy_until = t + tx;

    if (p.out_capture >= 0) record_capture(p.out_capture, p.node, t, *inst);

    // reorder holds: this departure lets held frames advance
    if (!p.held.empty()) {
        std::vector<InstPtr> release;
        for (auto it = p.held.begin(); it != p.held.end();) {
            if (--(*it)->hold <= 0) {
                release.push_back(std::move(*it));
                it = p.held.erase(it);
            } else {
                ++it;
            }
        }
        for (auto& r : release) enqueue(pi, std::move(r), t + tx, t);
    }

    Event arrive;
    arrive.t = t + tx + p.prop_ns;
    arrive.node = ports_[p.peer_port].node;
    arrive.kind = Ev::Arrive;
    arrive.a = p.peer_port;
    arrive.inst = std::move(inst);
    push(std::move(arrive));

    Event end;
    end.t = t + tx;
    end.node = p.node;
    end.kind = Ev::TxEnd;
    end.a = pi;
    push(std::move(end));
}

void Simulator::deliver(int node, InstPtr& inst, TimeNs t) {
    StreamRt& srt = streams_[inst->pkt->stream];
    if (srt.spec->redundant &&
        srt.spec->frer_elimination == FrerEliminationPoint::Listener) {
        auto& rec = recovery_[{srt.index, node}];
        auto [ok, next] = frer_accept(rec, inst->pkt->seq);
        rec = std::move(next);
        if (!ok) {
            result_.stats.frer_discarded += 1;
            return;
        }
    }
    result_.stats.delivered += 1;
    auto it = srt.listener_stats.find(node);
    if (it == srt.listener_stats.end()) return;
    ListenerStats& ls = result_.stats.listeners[it->second];
    ls.received += 1;
    if (!inst->pkt->injected) {
        TimeNs lat = t - inst->pkt->created;
        ls.min_latency_ns = std::min(ls.min_latency_ns, lat);
        ls.max_latency_ns = std::max(ls.max_latency_ns, lat);
    }
}

void Simulator::on_arrive(int pi, InstPtr inst, TimeNs t) {
    Port& p = ports_[pi];
    if (p.in_capture >= 0) record_capture(p.in_capture, p.node, t, *inst);
    int node = p.node;
    StreamRt& srt = streams_[inst->pkt->stream];

    if (node_kind_[node] == NodeKind::Endpoint) {
        bool listener = inst->variant == 1
                            ? srt.route.deliver_here[node] != 0
                            : srt.route.alt_paths[inst->path_idx].listener == node;
        if (listener) deliver(node, inst, t);
        return;
    }

    TimeNs ready = t + cfg_.topology.switch_processing_ns;
    if (inst->variant == 1) {
        const auto& egress = srt.route.egress[node];
        for (size_t i = 0; i < egress.size(); ++i) {
            const TreeEdge& e = egress[i];
            InstPtr copy;
            if (i + 1 == egress.size()) {
                copy = std::move(inst);
            } else {
                copy = std::make_shared<Instance>(*inst);
            }
            copy->terminals = e.terminals;
            copy->anomaly_checked = false;
            copy->shaping_exempt = false;
            copy->hold = 0;
            // last-switch duplicate elimination happens before the edge link
            if (srt.spec->redundant &&
                srt.spec->frer_elimination == FrerEliminationPoint::LastSwitch) {
                int peer_node = ports_[ports_[e.port].peer_port].node;
                if (node_kind_[peer_node] == NodeKind::Endpoint) {
                    auto& rec = recovery_[{srt.index, peer_node}];
                    auto [ok, next] = frer_accept(rec, copy->pkt->seq);
                    rec = std::move(next);
                    if (!ok) {
                        result_.stats.frer_discarded += 1;
                        continue;
                    }
                }
            }
            enqueue(e.port, std::move(copy), ready, t);
        }
    } else {
        const auto& path = srt.route.alt_paths[inst->path_idx];
        if (inst->path_pos >= (int)path.hops.size()) return;  // defensive
        const TreeEdge& e = path.hops[inst->path_pos];
        inst->path_pos += 1;
        inst->anomaly_checked = false;
        inst->shaping_exempt = false;
        if (srt.spec->redundant &&
            srt.spec->frer_elimination == FrerEliminationPoint::LastSwitch) {
            int peer_node = ports_[ports_[e.port].peer_port].node;
            if (node_kind_[peer_node] == NodeKind::Endpoint) {
                auto& rec = recovery_[{srt.index, peer_node}];
                auto [ok, next] = frer_accept(rec, inst->pkt->seq);
                rec = std::move(next);
                if (!ok) {
                    result_.stats.frer_discarded += 1;
                    return;
                }
            }
        }
        enqueue(e.port, std::move(inst), ready, t);
    }
}

void Simulator::generate(int si, TimeNs t) {
    StreamRt& rt = streams_[si];
    if (t >= cfg_.duration_ns) return;

    auto rec = std::make_shared<PacketRec>();
    rec->stream = si;
    rec->seq = rt.next_seq++;
    rec->created = t;

    result_.stats.generated_packets += 1;
    result_.stats.generated_terminals += rt.total_terminals;
    for (auto& [node, idx] : rt.listener_stats) {
        (void)node;
        result_.stats.listeners[idx].sent += 1;
    }

    const auto& root_egress = rt.route.egress[rt.src_node];
    for (const auto& e : root_egress) {
        auto inst = std::make_shared<Instance>();
        inst->pkt = rec;
        inst->frame = rt.template_frame;
        inst->terminals = e.terminals;
        enqueue(e.port, std::move(inst), t, t);
    }
    for (size_t i = 0; i < rt.route.alt_paths.size(); ++i) {
        auto inst = std::make_shared<Instance>();
        inst->pkt = rec;
        inst->frame = rt.template_frame;
        inst->variant = 2;
        inst->path_idx = (int)i;
        inst->path_pos = 1;
        inst->terminals = 1;
        enqueue(rt.route.alt_paths[i].hops[0].port, std::move(inst), t, t);
    }

    TimeNs step;
    switch (rt.spec->cycle.kind) {
        case CycleSpec::Kind::Fixed: step = rt.spec->cycle.lo_ns; break;
        case CycleSpec::Kind::Uniform:
            step = rt.rng.uniform_i64(rt.spec->cycle.lo_ns, rt.spec->cycle.hi_ns);
            break;
        default:
            step = std::max<TimeNs>(
                1, (TimeNs)std::llround(rt.rng.exponential((double)rt.spec->cycle.lo_ns)));
            break;
    }
    rt.next_local += step;
    Event e;
    e.t = clocks_[rt.src_node].true_time_for_local(rt.next_local);
    e.node = rt.src_node;
    e.kind = Ev::Generate;
    e.a = si;
    push(std::move(e));
}

void Simulator::inject(int ai, uint64_t k, TimeNs t) {
    AnomalyRuntime& art = anomalies_[ai];
    if (!decide_action(art, t)) return;
    const InjectRt& inj = injectors_[ai];
    StreamRt& srt = streams_[inj.stream];

    auto rec = std::make_shared<PacketRec>();
    rec->stream = inj.stream;
    rec->seq = (1ull << 60) + k;
    rec->created = t;
    rec->injected = true;

    auto inst = std::make_shared<Instance>();
    inst->pkt = rec;
    inst->frame = inj.frame;
    inst->label = PacketLabel::Injected;
    if (auto pl = phase_active(art.cfg->phase, t)) inst->phase_label = *pl;
    inst->terminals = inj.terminals;
    inst->anomaly_checked = true;
    result_.stats.injected_terminals += inj.terminals;
    result_.ledger.push_back(
        {t, art.cfg->id, AnomalyKind::Inject, srt.spec->id, rec->seq, "terminals=" +
         std::to_string(inj.terminals)});
    recover_pending_[ai].insert(srt.index);
    enqueue(inj.port, std::move(inst), t, t);
}

SimResult Simulator::run() {
    build_topology();
    build_routes();
    build_schedules();
    build_anomalies();
    prime_generation();

    while (!heap_.empty()) {
        Event e = heap_.top();
        heap_.pop();
        sim_now_ = e.t;
        switch (e.kind) {
            case Ev::Generate: generate(e.a, e.t); break;
            case Ev::Inject: inject(e.a, e.b, e.t); break;
            case Ev::TxEnd: schedule_port(e.a, e.t); break;
            case Ev::Arrive: on_arrive(e.a, std::move(e.inst), e.t); break;
            case Ev::PortSel: {
                Port& p = ports_[e.a];
                if (e.b != p.sel_gen) break;
                if (p.busy_until > e.t) break;
                auto best = best_start(e.a, e.t);
                if (!best) break;
                if (best->first <= e.t)
                    transmit(e.a, best->second, e.t);
                else
                    schedule_port(e.a, e.t);
                break;
            }
        }
        // a drained network may still hold reordered frames; flush them
        if (heap_.empty()) {
            for (size_t pi = 0; pi < ports_.size(); ++pi) {
                Port& p = ports_[pi];
                if (p.held.empty()) continue;
                auto held = std::move(p.held);
                p.held.clear();
                for (auto& h : held) {
                    h->hold = 0;
                    enqueue((int)pi, std::move(h), sim_now_, sim_now_);
                }
            }
        }
    }

    // local clocks may step backwards at sync boundaries; captures are
    // emitted in timestamp order
    for (auto& point : result_.captures.points)
        std::stable_sort(point.packets.begin(), point.packets.end(),
                         [](const LabeledPacket& a, const LabeledPacket& b) {
                             return a.ts < b.ts;
                         });
    return std::move(result_);
}

}  // namespace

SimResult run_simulation(const ScenarioConfig& cfg) {
    ValidationReport rep = validate_scenario(cfg);
    if (!rep.ok())
        throw SimError("invalid scenario: " + rep.errors.front().path + ": " +
                       rep.errors.front().message);
    Simulator sim(cfg);
    return sim.run();
}

std::string serialize_stats(const StatsReport& report) {
    std::ostringstream out;
    out << "stream,listener,sent,received,min_latency_ns,max_latency_ns,jitter_ns\n";
    for (const auto& l : report.listeners) {
        TimeNs mn = l.received > 0 ? l.min_latency_ns : -1;
        TimeNs mx = l.received > 0 ? l.max_latency_ns : -1;
        out << l.stream_id << ',' << l.listener << ',' << l.sent << ',' << l.received << ','
            << mn << ',' << mx << ',' << l.jitter_ns() << '\n';
    }
    for (const auto& c : report.capture_points)
        out << "# capture " << c.interface_name << " packets=" << c.packet_count << '\n';
    out << "# generated_packets=" << report.generated_packets
        << " generated_terminals=" << report.generated_terminals
        << " injected_terminals=" << report.injected_terminals
        << " delivered=" << report.delivered << " frer_discarded=" << report.frer_discarded
        << " anomaly_eliminated=" << report.anomaly_eliminated_terminals
        << " queue_dropped=" << report.queue_dropped_terminals << '\n';
    return out.str();
}

}  // namespace nadsim
