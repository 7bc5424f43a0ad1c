#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nadsim/anomaly.hpp"
#include "nadsim/packet.hpp"
#include "nadsim/scenario.hpp"

namespace nadsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ListenerStats {
    std::string stream_id;
    std::string listener;
    int64_t sent = 0;
    int64_t received = 0;
    TimeNs min_latency_ns = std::numeric_limits<TimeNs>::max();
    TimeNs max_latency_ns = -1;

    TimeNs jitter_ns() const {
        return max_latency_ns < 0 ? 0 : max_latency_ns - min_latency_ns;
    }
};

struct CapturePointStats {
    std::string interface_name;
    int64_t packet_count = 0;
};

struct StatsReport {
    std::vector<ListenerStats> listeners;
    std::vector<CapturePointStats> capture_points;

    // instance accounting: one terminal per (packet, listener, path variant)
    int64_t generated_packets = 0;
    int64_t generated_terminals = 0;
    int64_t injected_terminals = 0;
    int64_t delivered = 0;
    int64_t frer_discarded = 0;
    int64_t anomaly_eliminated_terminals = 0;
    int64_t queue_dropped_terminals = 0;

    bool conservation_holds() const {
        return delivered + frer_discarded + anomaly_eliminated_terminals +
                   queue_dropped_terminals ==
               generated_terminals + injected_terminals;
    }

    const ListenerStats* find(const std::string& stream_id, const std::string& listener) const {
        for (const auto& l : listeners)
            if (l.stream_id == stream_id && l.listener == listener) return &l;
        return nullptr;
    }
};

// Delimited text, one row per (stream, listener).
std::string serialize_stats(const StatsReport& report);

struct SimResult {
    CaptureSet captures;
    StatsReport stats;
    std::vector<LedgerRow> ledger;
};

// Deterministic single-threaded discrete-event run of the scenario. Traffic
// generation stops at cfg.duration_ns; in-flight packets drain to completion.
// Capture frames are snap-truncated to kCaptureSnapLength bytes with the full
// size kept as wire_length.
SimResult run_simulation(const ScenarioConfig& cfg);

inline constexpr int kCaptureSnapLength = 128;

}  // namespace nadsim
