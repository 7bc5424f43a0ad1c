#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nadsim/packet.hpp"
#include "nadsim/scenario.hpp"

namespace nadsim {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One observation interval. Windows are packet-triggered: a window opens at
// the first packet at/after the previous window's close and closes at the
// first packet whose timestamp is >= open + nominal_length; that trigger
// packet is the window's last member and real_length runs to its timestamp.
// The trailing window (no trigger) keeps real_length = max(nominal, span).
struct MetricWindow {
    TimeNs start = 0;
    TimeNs nominal_length = 0;
    TimeNs real_length = 0;
    double bandwidth_bps = 0;       // sum of wire bits / real_length
    double avg_frame_size = 0;      // mean wire bytes
    double avg_frame_gap_ns = 0;    // mean inter-arrival; 0 below 2 packets
    double avg_cycle_jitter_ns = 0; // mean |gap - median gap|; 0 below 2
    int64_t packet_count = 0;
    bool abnormal = false;          // ground truth from member labels
};

inline constexpr TimeNs kDefaultWindowNs = 100'000'000;

// Order-preserving subsequence of the capture matching the filter. The
// filter must set at least one criterion.
std::vector<LabeledPacket> filter_stream(const CapturePointData& point, const StreamFilter& f);

// Windowed feature extraction over a time-ordered packet sequence. Ground
// truth per window: abnormal iff any member packet label differs from BENIGN
// (BENIGN RECOVERED counts as abnormal evidence).
std::vector<MetricWindow> compute_window_metrics(const std::vector<LabeledPacket>& packets,
                                                 TimeNs nominal = kDefaultWindowNs);

// Wire size of a captured packet in bytes (snap-truncated frames report
// their original length).
inline int64_t wire_bytes(const LabeledPacket& p) {
    return p.wire_length > 0 ? p.wire_length : (int64_t)p.frame->size();
}

}  // namespace nadsim
