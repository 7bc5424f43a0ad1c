#pragma once

#include <cstdint>

#include "nadsim/rng.hpp"
#include "nadsim/scenario.hpp"

namespace nadsim {

// Bounded-offset clock model standing in for protocol-level synchronization.
// The local clock is piecewise linear: at every sync_interval boundary the
// offset is reset to a seed-determined value within +/-offset_bound, and the
// clock drifts at a per-node rate between syncs.
//
// Invariant: |local_time(t) - t| <= offset_bound + |drift| * (t - last_sync).
class ClockModel {
public:
    ClockModel() = default;

    // drift_ppm_bound: per-node rate error is drawn uniformly from
    // [-bound, +bound] ppm; the post-sync offset is redrawn each sync.
    ClockModel(const ClockParams& params, uint64_t seed, const std::string& node_name);

    // Perfect clock (drift 0, offset 0).
    static ClockModel perfect();

    TimeNs local_time(TimeNs true_time) const;

    // Earliest true time t with local_time(t) >= local. Piecewise-linear
    // inversion over sync segments.
    TimeNs true_time_for_local(TimeNs local) const;

    double drift_ppm() const { return drift_ppm_; }

private:
    TimeNs offset_at_segment(int64_t segment) const;

    TimeNs sync_interval_ = 0;  // 0 = perfect clock
    TimeNs offset_bound_ = 0;
    double drift_ppm_ = 0.0;
    uint64_t seed_ = 0;
    uint64_t node_salt_ = 0;
};

}  // namespace nadsim
