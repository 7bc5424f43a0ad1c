#include "nadsim/shaping.hpp"

#include <algorithm>

namespace nadsim {

namespace {

int64_t floordiv(int64_t a, int64_t b) {
    int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

int64_t ceildiv_pos(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

TimeNs tas_gate_transmit_time(const GateSchedule& sched, int pcp, TimeNs ready_at,
                              TimeNs tx_duration) {
    const auto& intervals = sched.open[pcp];
    if (intervals.empty())
        throw UnschedulableError("no open intervals for pcp " + std::to_string(pcp));
    bool fits = std::any_of(intervals.begin(), intervals.end(), [&](const GateSchedule::Interval& iv) {
        return iv.end - iv.start >= tx_duration;
    });
    if (!fits)
        throw UnschedulableError("frame transmission of " + std::to_string(tx_duration) +
                                 " ns fits no open interval of pcp " + std::to_string(pcp));
    int64_t cycle_index = floordiv(ready_at, sched.cycle_ns);
    for (;; ++cycle_index) {
        TimeNs base = cycle_index * sched.cycle_ns;
        for (const auto& iv : intervals) {
            if (iv.end - iv.start < tx_duration) continue;
            TimeNs start = std::max(ready_at, base + iv.start);
            if (start + tx_duration <= base + iv.end) return start;
        }
    }
}

TimeNs guard_transmit_time(const GateSchedule& sched, int pcp, TimeNs ready_at,
                           TimeNs tx_duration) {
    if (sched.cycle_ns <= 0) return ready_at;
    // protected windows: open intervals of gated classes other than pcp
    TimeNs t = ready_at;
    for (bool moved = true; moved;) {
        moved = false;
        int64_t base = floordiv(t, sched.cycle_ns) * sched.cycle_ns;
        for (int64_t b = base; b <= t + tx_duration; b += sched.cycle_ns) {
            for (int other = 0; other < 8; ++other) {
                if (other == pcp) continue;
                for (const auto& iv : sched.open[other]) {
                    TimeNs s = b + iv.start, e = b + iv.end;
                    if (t < e && t + tx_duration > s) {
                        t = e;
                        moved = true;
                    }
                }
            }
        }
    }
    return t;
}

CreditState make_credit_state(int64_t idle_slope_bps, int64_t link_rate_bps) {
    CreditState s;
    s.idle_slope_bps = idle_slope_bps;
    s.send_slope_bps = idle_slope_bps - link_rate_bps;
    return s;
}

std::pair<TimeNs, CreditState> cbs_transmit_time(const CreditState& state, TimeNs now,
                                                 TimeNs tx_duration) {
    CreditState s = state;
    if (now > s.last_update) {
        s.credit += s.idle_slope_bps * (now - s.last_update);
        s.last_update = now;
    }
    TimeNs start = now;
    if (s.credit < 0) {
        TimeNs wait = ceildiv_pos(-s.credit, s.idle_slope_bps);
        start = now + wait;
        s.credit += s.idle_slope_bps * wait;
    }
    s.credit += s.send_slope_bps * tx_duration;
    s.last_update = start + tx_duration;
    return {start, s};
}

CreditState cbs_idle_update(const CreditState& state, TimeNs now, bool queue_empty) {
    CreditState s = state;
    if (now > s.last_update) {
        s.credit += s.idle_slope_bps * (now - s.last_update);
        s.last_update = now;
    }
    if (queue_empty && s.credit > 0) s.credit = 0;
    return s;
}

std::pair<bool, RecoveryState> frer_accept(const RecoveryState& state, uint64_t seq) {
    bool seen = std::find(state.history.begin(), state.history.end(), seq) != state.history.end();
    if (seen) return {false, state};
    RecoveryState next = state;
    next.history.push_back(seq);
    while (next.history.size() > next.history_length) next.history.pop_front();
    return {true, next};
}

}  // namespace nadsim
