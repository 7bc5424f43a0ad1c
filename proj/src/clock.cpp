#include "nadsim/clock.hpp"

#include <string>

namespace nadsim {

namespace {

int64_t floordiv(int64_t a, int64_t b) {
    int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

ClockModel::ClockModel(const ClockParams& params, uint64_t seed, const std::string& node_name) {
    sync_interval_ = params.sync_interval_ns;
    offset_bound_ = params.post_sync_offset_bound_ns;
    seed_ = seed;
    node_salt_ = Rng::fnv1a64(node_name);
    Rng drift_rng(Rng::fnv1a64("clock-drift") ^ node_salt_ ^ (seed * 0x9e3779b97f4a7c15ull));
    drift_ppm_ = drift_rng.uniform(-params.drift_ppm, params.drift_ppm);
}

ClockModel ClockModel::perfect() { return ClockModel(); }

TimeNs ClockModel::offset_at_segment(int64_t segment) const {
    if (offset_bound_ == 0) return 0;
    Rng rng((seed_ * 0x9e3779b97f4a7c15ull) ^ node_salt_ ^
            (0xd1b54a32d192ed03ull * (uint64_t)(segment + 1)));
    return rng.uniform_i64(-offset_bound_, offset_bound_);
}

TimeNs ClockModel::local_time(TimeNs true_time) const {
    if (sync_interval_ <= 0) return true_time;
    int64_t seg = floordiv(true_time, sync_interval_);
    TimeNs seg_start = seg * sync_interval_;
    TimeNs delta = true_time - seg_start;
    int64_t drift_ppb = (int64_t)(drift_ppm_ * 1000.0);
    TimeNs drifted = delta + (TimeNs)(((__int128)delta * drift_ppb) / 1'000'000'000);
    return seg_start + offset_at_segment(seg) + drifted;
}

TimeNs ClockModel::true_time_for_local(TimeNs local) const {
    if (sync_interval_ <= 0) return local;
    int64_t drift_ppb = (int64_t)(drift_ppm_ * 1000.0);
    int64_t guess = floordiv(local, sync_interval_);
    for (int64_t seg = guess - 2; seg <= guess + 2; ++seg) {
        TimeNs seg_start = seg * sync_interval_;
        TimeNs local_at_start = seg_start + offset_at_segment(seg);
        // local at exclusive segment end
        TimeNs span = sync_interval_ + (TimeNs)(((__int128)sync_interval_ * drift_ppb) / 1'000'000'000);
        if (local_at_start + span <= local) continue;  // whole segment before target
        if (local_at_start >= local) return seg_start;
        // first guess, then correct for the truncating division in local_time
        __int128 need = (__int128)(local - local_at_start) * 1'000'000'000;
        int64_t denom = 1'000'000'000 + drift_ppb;
        TimeNs delta = (TimeNs)((need + denom - 1) / denom);
        auto drifted = [&](TimeNs d) {
            return d + (TimeNs)(((__int128)d * drift_ppb) / 1'000'000'000);
        };
        while (delta > 0 && drifted(delta - 1) >= local - local_at_start) --delta;
        while (drifted(delta) < local - local_at_start) ++delta;
        if (delta < sync_interval_) return seg_start + delta;
    }
    // drift is bounded well below the sync interval; fall through cannot happen
    return local;
}

}  // namespace nadsim
