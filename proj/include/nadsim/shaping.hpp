#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "nadsim/scenario.hpp"

namespace nadsim {

// Repeating gate-control schedule for one egress port. Intervals are
// half-open [start, end) offsets within the cycle, kept sorted and merged.
struct GateSchedule {
    TimeNs cycle_ns = 0;
    // per-PCP open intervals; a PCP with no entry is treated as always open
    // outside the protected windows of gated classes
    struct Interval {
        TimeNs start;
        TimeNs end;
    };
    std::vector<Interval> open[8];

    bool gated(int pcp) const { return !open[pcp].empty(); }
};

struct UnschedulableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Earliest t >= ready_at such that [t, t+tx_duration) lies inside one open
// interval of `pcp`. A frame that cannot finish before gate close waits for
// the next window. Throws UnschedulableError when tx_duration fits no
// interval. Times are in the clock domain of the schedule.
TimeNs tas_gate_transmit_time(const GateSchedule& sched, int pcp, TimeNs ready_at,
                              TimeNs tx_duration);

// Earliest t >= ready_at such that [t, t+tx_duration) does not intersect any
// open interval of gated classes other than `pcp` (guard: ungated traffic may
// not run into a protected window).
TimeNs guard_transmit_time(const GateSchedule& sched, int pcp, TimeNs ready_at,
                           TimeNs tx_duration);

// Credit-based shaper state for one traffic class on one port. Credit is kept
// in units of bit-nanoseconds-per-second so that slope(bit/s) x dt(ns) needs
// no division; divide by 1e9 for bits.
struct CreditState {
    int64_t credit = 0;  // scaled: bits x 1e9
    int64_t idle_slope_bps = 0;
    int64_t send_slope_bps = 0;  // idle_slope - link_rate (negative)
    TimeNs last_update = 0;

    double credit_bits() const { return (double)credit / 1e9; }
};

CreditState make_credit_state(int64_t idle_slope_bps, int64_t link_rate_bps);

// Returns the earliest time >= now at which credit is non-negative, and the
// state after transmitting for tx_duration starting then. Credit accrues at
// idle_slope while the frame waits and drains at send_slope during
// transmission.
std::pair<TimeNs, CreditState> cbs_transmit_time(const CreditState& state, TimeNs now,
                                                 TimeNs tx_duration);

// Accrue idle credit up to `now`; when the queue is empty positive credit is
// reset to zero.
CreditState cbs_idle_update(const CreditState& state, TimeNs now, bool queue_empty);

// FRER sequence recovery: sliding history of accepted sequence numbers for one
// (stream, recovery point).
struct RecoveryState {
    std::deque<uint64_t> history;
    size_t history_length = 64;
};

// accept == true iff seq is not in history; accepted numbers enter the
// history, evicting the oldest entry beyond history_length.
std::pair<bool, RecoveryState> frer_accept(const RecoveryState& state, uint64_t seq);

}  // namespace nadsim
