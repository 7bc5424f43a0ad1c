#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nadsim/packet.hpp"
#include "nadsim/rng.hpp"
#include "nadsim/scenario.hpp"

namespace nadsim {

// Square-wave phase schedule: returns the phase label iff t falls inside an
// active interval.
std::optional<std::string> phase_active(const PhaseSpec& phase, TimeNs t);

// Per-anomaly mutable state carried through one simulation run.
struct AnomalyRuntime {
    const AnomalyConfig* cfg = nullptr;
    Rng rng;
    TimeNs last_action = std::numeric_limits<TimeNs>::min() / 2;
    int64_t action_count = 0;
};

// True iff the phase is active, the clearance since the last action has
// elapsed, and the probability draw passes. A true result records t as the
// last action time.
bool decide_action(AnomalyRuntime& state, TimeNs t);

// Does a frame observed on `iface` travelling in `dir` match the filter?
// Criteria are conjunctive; an empty filter matches everything.
bool filter_matches(const StreamFilter& f, const std::string& iface, Direction dir,
                    const ParsedFrame& frame);

// In-place payload manipulation: overwrite `length` bytes at `offset` with
// `value`, clamped to the frame; returns the number of bytes changed.
int manipulate_bytes(std::vector<uint8_t>& frame, int offset, int length, uint8_t value);

struct LedgerRow {
    TimeNs true_time_ns = 0;
    std::string anomaly_id;
    AnomalyKind kind = AnomalyKind::Delay;
    std::string stream_id;
    uint64_t seq = 0;
    std::string action_detail;
};

std::string serialize_ledger(const std::vector<LedgerRow>& rows);

}  // namespace nadsim
