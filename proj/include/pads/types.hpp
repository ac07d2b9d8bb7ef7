#ifndef PADS_TYPES_HPP
#define PADS_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace pads {

/// Discrete timestep counter. Starts at 0 and only moves forward; every
/// interaction sent at step t is delivered at t + 1 (fixed lookahead of one).
using VirtualTime = std::uint64_t;

/// Unique, dense entity identifier. Assigned in registration order and stable
/// across migrations: identity never changes when placement changes.
using EntityId = std::uint64_t;

using LpId = std::uint32_t;

enum class BehaviorKind : std::uint8_t {
    Gossip = 0,
    Community = 1,
    Wireless = 2,
    Custom = 3,
};

inline const char* to_string(BehaviorKind k) {
    switch (k) {
        case BehaviorKind::Gossip: return "gossip";
        case BehaviorKind::Community: return "community";
        case BehaviorKind::Wireless: return "wireless";
        case BehaviorKind::Custom: return "custom";
    }
    return "?";
}

/// A timestamped message between two entities. deliver_step is always
/// send_step + 1; seq restarts at 0 for each (src, step) and increments per
/// message the source emits, giving every inbox a unique (src, seq) sort key.
struct Interaction {
    EntityId src = 0;
    EntityId dst = 0;
    VirtualTime send_step = 0;
    VirtualTime deliver_step = 0;
    std::uint32_t seq = 0;
    std::vector<std::uint8_t> payload;
};

/// Per-LP accounting for one executed step. Message counts are exact and
/// split by whether the delivery crossed an LP boundary.
struct StepReport {
    LpId lp_id = 0;
    VirtualTime step = 0;
    std::uint64_t messages_sent_local = 0;
    std::uint64_t messages_sent_remote = 0;
    std::uint64_t entities_executed = 0;
    std::uint64_t wall_time_us = 0;
    std::uint64_t barrier_wait_us = 0;
};

enum class MigrationReason : std::uint8_t {
    Cluster = 0,
    Balance = 1,
    Adapt = 2,
};

inline const char* to_string(MigrationReason r) {
    switch (r) {
        case MigrationReason::Cluster: return "cluster";
        case MigrationReason::Balance: return "balance";
        case MigrationReason::Adapt: return "adapt";
    }
    return "?";
}

/// One executed migration: serialized state size is measured, transfer time is
/// wall clock (and therefore excluded from determinism comparisons).
struct MigrationRecord {
    VirtualTime step = 0;
    EntityId entity = 0;
    LpId from_lp = 0;
    LpId to_lp = 0;
    MigrationReason reason = MigrationReason::Cluster;
    std::uint64_t bytes = 0;
    std::uint64_t transfer_us = 0;
};

/// Outcome of one barrier: migrations applied before the next step plus the
/// per-LP timings collected at the rendezvous.
struct CommitRecord {
    VirtualTime step = 0;
    std::vector<MigrationRecord> migrations;
    std::vector<StepReport> reports;
    std::uint64_t state_digest = 0;
};

} // namespace pads

#endif // PADS_TYPES_HPP
