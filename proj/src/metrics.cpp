#include "nadsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "nadsim/anomaly.hpp"

namespace nadsim {

std::vector<LabeledPacket> filter_stream(const CapturePointData& point, const StreamFilter& f) {
    if (!f.any_criterion()) throw MetricsError("stream filter sets no criterion");
    std::vector<LabeledPacket> out;
    Direction dir = point.interface_name.size() > 3 &&
                            point.interface_name.rfind("-out") == point.interface_name.size() - 4
                        ? Direction::Out
                        : Direction::In;
    // iface criterion matches against the full capture interface name
    for (const auto& p : point.packets) {
        auto parsed = parse_frame(*p.frame);
        if (!parsed) continue;
        if (filter_matches(f, point.interface_name, dir, *parsed)) out.push_back(p);
    }
    return out;
}

namespace {

MetricWindow make_window(const std::vector<LabeledPacket>& packets, size_t first, size_t last,
                         TimeNs nominal, TimeNs real_length) {
    MetricWindow w;
    w.start = packets[first].ts;
    w.nominal_length = nominal;
    w.real_length = real_length;
    w.packet_count = (int64_t)(last - first + 1);

    int64_t total_bytes = 0;
    for (size_t i = first; i <= last; ++i) {
        total_bytes += wire_bytes(packets[i]);
        if (packets[i].labels.packet_label != PacketLabel::Benign) w.abnormal = true;
    }
    w.bandwidth_bps = (double)total_bytes * 8.0 * 1e9 / (double)real_length;
    w.avg_frame_size = (double)total_bytes / (double)w.packet_count;

    if (w.packet_count >= 2) {
        std::vector<TimeNs> gaps;
        gaps.reserve(last - first);
        for (size_t i = first + 1; i <= last; ++i)
            gaps.push_back(packets[i].ts - packets[i - 1].ts);
        double sum = 0;
        for (TimeNs g : gaps) sum += (double)g;
        w.avg_frame_gap_ns = sum / (double)gaps.size();

        std::vector<TimeNs> sorted = gaps;
        std::sort(sorted.begin(), sorted.end());
        double median = sorted.size() % 2 == 1
                            ? (double)sorted[sorted.size() / 2]
                            : 0.5 * ((double)sorted[sorted.size() / 2 - 1] +
                                     (double)sorted[sorted.size() / 2]);
        double dev = 0;
        for (TimeNs g : gaps) dev += std::abs((double)g - median);
        w.avg_cycle_jitter_ns = dev / (double)gaps.size();
    }
    return w;
}

}  // namespace

std::vector<MetricWindow> compute_window_metrics(const std::vector<LabeledPacket>& packets,
                                                 TimeNs nominal) {
    if (nominal <= 0) throw MetricsError("window length must be positive");
    for (size_t i = 1; i < packets.size(); ++i)
        if (packets[i].ts < packets[i - 1].ts)
            throw MetricsError("packets not time-ordered");

    std::vector<MetricWindow> windows;
    size_t i = 0;
    while (i < packets.size()) {
        TimeNs open = packets[i].ts;
        size_t trigger = i + 1;
        while (trigger < packets.size() && packets[trigger].ts < open + nominal) ++trigger;
        if (trigger < packets.size()) {
            // trigger packet closes and joins the window
            windows.push_back(make_window(packets, i, trigger, nominal,
                                          packets[trigger].ts - open));
            i = trigger + 1;
        } else {
            size_t last = packets.size() - 1;
            TimeNs span = packets[last].ts - open;
            windows.push_back(make_window(packets, i, last, nominal,
                                          std::max(nominal, span)));
            break;
        }
    }
    return windows;
}

}  // namespace nadsim
