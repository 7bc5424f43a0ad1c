#include "nadsim/anomaly.hpp"

#include <algorithm>
#include <sstream>

namespace nadsim {

std::optional<std::string> phase_active(const PhaseSpec& phase, TimeNs t) {
    if (t < phase.start_ns) return std::nullopt;
    TimeNs period = phase.active_ns + phase.inactive_ns;
    TimeNs pos = period > 0 ? (t - phase.start_ns) % period : t - phase.start_ns;
    if (pos < phase.active_ns) return phase.label;
    return std::nullopt;
}

bool decide_action(AnomalyRuntime& state, TimeNs t) {
    if (!phase_active(state.cfg->phase, t)) return false;
    if (t - state.last_action < state.cfg->min_clearance_ns) return false;
    if (state.rng.next_double() >= state.cfg->probability) return false;
    state.last_action = t;
    ++state.action_count;
    return true;
}

bool filter_matches(const StreamFilter& f, const std::string& iface, Direction dir,
                    const ParsedFrame& frame) {
    if (f.direction != Direction::Both && dir != Direction::Both && f.direction != dir)
        return false;
    if (f.iface && *f.iface != iface) return false;
    if (f.vlan && (!frame.vlan_id || *frame.vlan_id != *f.vlan)) return false;
    if (f.pcp && (!frame.pcp || *frame.pcp != *f.pcp)) return false;
    if (f.dst_mac) {
        auto want = mac_from_string(*f.dst_mac);
        if (!want || *want != frame.dst_mac) return false;
    }
    if (f.udp_dst && (!frame.udp_dst || *frame.udp_dst != *f.udp_dst)) return false;
    return true;
}

int manipulate_bytes(std::vector<uint8_t>& frame, int offset, int length, uint8_t value) {
    if (offset < 0 || offset >= (int)frame.size() || length <= 0) return 0;
    int end = std::min((int)frame.size(), offset + length);
    std::fill(frame.begin() + offset, frame.begin() + end, value);
    return end - offset;
}

std::string serialize_ledger(const std::vector<LedgerRow>& rows) {
    std::ostringstream out;
    out << "true_time_ns,anomaly_id,kind,stream_id,seq,action_detail\n";
    auto kind_name = [](AnomalyKind k) {
        switch (k) {
            case AnomalyKind::Delay: return "delay";
            case AnomalyKind::Eliminate: return "eliminate";
            case AnomalyKind::Inject: return "inject";
            case AnomalyKind::Manipulate: return "manipulate";
            default: return "reorder";
        }
    };
    for (const auto& r : rows)
        out << r.true_time_ns << ',' << r.anomaly_id << ',' << kind_name(r.kind) << ','
            << r.stream_id << ',' << r.seq << ',' << r.action_detail << '\n';
    return out.str();
}

}  // namespace nadsim
