#ifndef PADS_WORLD_HPP
#define PADS_WORLD_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pads/types.hpp"

namespace pads {

/// One simulated entity: a tiny migratable piece of the model. The state is an
/// opaque byte record that must round-trip through serialization
/// byte-identically; together with the RNG state it is everything that moves
/// when the entity is re-homed.
struct EntityRecord {
    EntityId id = 0;
    BehaviorKind behavior = BehaviorKind::Custom;
    double weight = 0.0; // abstract work units per step, >= 0
    std::uint64_t rng_state = 0;
    std::vector<std::uint8_t> state;
};

/// Canonical serialized form of an entity's migratable payload. The same bytes
/// feed migration transfer and the digest leaf, so "migrates correctly" and
/// "digests equally" are the same property.
std::vector<std::uint8_t> encode_entity_payload(const EntityRecord& rec);

/// Inverse of encode_entity_payload. Throws MigrationFault on malformed input.
/// The id is carried outside the payload and left untouched.
void decode_entity_payload(std::span<const std::uint8_t> payload, EntityRecord& out);

/// Per-entity digest leaf: hash of (id, serialized payload). World digests are
/// combined from leaves in ascending id order, which makes them computable
/// from per-LP pieces without moving state around.
std::uint64_t entity_digest_leaf(const EntityRecord& rec);

/// Combines leaves (already in ascending entity id order) into a world digest.
/// The empty sequence hashes to the FNV-1a offset basis.
std::uint64_t combine_digest_leaves(std::span<const std::uint64_t> leaves);

/**
 * Entity registry plus placement map.
 *
 * Registration happens at setup only and assigns dense ids 0..n-1. During a
 * run the registry structure is read-only; placement and state content change
 * only inside barrier commits. Entity ids, weights, behavior kinds and state
 * *lengths* are replicated identically in every process; state *content* is
 * authoritative only on the hosting LP.
 */
class World {
public:
    explicit World(LpId pool_size, std::uint64_t global_seed);

    /// Dense id assignment: the returned id equals the number of prior
    /// registrations. Throws ConfigError if placement is out of range and
    /// LifecycleError if the simulation already started.
    EntityId register_entity(BehaviorKind behavior, std::vector<std::uint8_t> initial_state,
                             double weight, LpId placement);

    void seal(); // called by the engine when the run starts

    LpId pool_size() const { return pool_size_; }
    std::uint64_t global_seed() const { return global_seed_; }
    std::size_t entity_count() const { return records_.size(); }

    EntityRecord& record(EntityId id) { return records_[id]; }
    const EntityRecord& record(EntityId id) const { return records_[id]; }
    bool valid_id(EntityId id) const { return id < records_.size(); }

    LpId placement_of(EntityId id) const { return placement_[id]; }
    const std::vector<LpId>& placement() const { return placement_; }
    void set_placement(EntityId id, LpId lp) { placement_[id] = lp; }

    /// Entity ids resident on one LP, ascending.
    std::vector<EntityId> residents_of(LpId lp) const;

    /// Digest of the whole world (requires every record's content to be
    /// authoritative locally, i.e. single-process use or the initial state).
    std::uint64_t state_digest() const;

private:
    LpId pool_size_;
    std::uint64_t global_seed_;
    bool sealed_ = false;
    std::vector<EntityRecord> records_;
    std::vector<LpId> placement_;
};

} // namespace pads

#endif // PADS_WORLD_HPP
