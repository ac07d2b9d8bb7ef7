#include "pads/world.hpp"

#include <bit>

#include "pads/bytes.hpp"
#include "pads/digest.hpp"
#include "pads/errors.hpp"
#include "pads/rng.hpp"

namespace pads {

std::vector<std::uint8_t> encode_entity_payload(const EntityRecord& rec) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(rec.behavior));
    w.f64(rec.weight);
    w.u64(rec.rng_state);
    w.sized_bytes(rec.state);
    return w.take();
}

void decode_entity_payload(std::span<const std::uint8_t> payload, EntityRecord& out) {
    try {
        ByteReader r(payload);
        std::uint8_t kind = r.u8();
        if (kind > static_cast<std::uint8_t>(BehaviorKind::Custom)) {
            throw MigrationFault("unknown behavior kind " + std::to_string(kind));
        }
        out.behavior = static_cast<BehaviorKind>(kind);
        out.weight = r.f64();
        out.rng_state = r.u64();
        out.state = r.sized_bytes();
        if (!r.done()) {
            throw MigrationFault("trailing bytes in entity payload");
        }
    } catch (const ProtocolError& e) {
        throw MigrationFault(std::string("malformed entity payload: ") + e.what());
    }
}

std::uint64_t entity_digest_leaf(const EntityRecord& rec) {
    // streams the same byte sequence encode_entity_payload produces, without
    // materializing it
    Fnv64 h;
    h.update_u64(rec.id);
    h.update(static_cast<std::uint8_t>(rec.behavior));
    h.update_u64(std::bit_cast<std::uint64_t>(rec.weight));
    h.update_u64(rec.rng_state);
    h.update_u32(static_cast<std::uint32_t>(rec.state.size()));
    h.update(rec.state);
    return h.value();
}

std::uint64_t combine_digest_leaves(std::span<const std::uint64_t> leaves) {
    Fnv64 h;
    for (std::uint64_t leaf : leaves) h.update_u64(leaf);
    return h.value();
}

World::World(LpId pool_size, std::uint64_t global_seed)
    : pool_size_(pool_size), global_seed_(global_seed) {
    if (pool_size == 0) {
        throw ConfigError("pool_size must be at least 1");
    }
}

EntityId World::register_entity(BehaviorKind behavior, std::vector<std::uint8_t> initial_state,
                                double weight, LpId placement) {
    if (sealed_) {
        throw LifecycleError("register_entity after the simulation started");
    }
    if (placement >= pool_size_) {
        throw ConfigError("placement " + std::to_string(placement) + " out of range for pool_size " +
                          std::to_string(pool_size_));
    }
    if (weight < 0.0) {
        throw ConfigError("entity weight must be non-negative");
    }
    EntityId id = records_.size();
    EntityRecord rec;
    rec.id = id;
    rec.behavior = behavior;
    rec.weight = weight;
    rec.rng_state = entity_seed(global_seed_, id);
    rec.state = std::move(initial_state);
    records_.push_back(std::move(rec));
    placement_.push_back(placement);
    return id;
}

void World::seal() { sealed_ = true; }

std::vector<EntityId> World::residents_of(LpId lp) const {
    std::vector<EntityId> out;
    for (EntityId id = 0; id < placement_.size(); ++id) {
        if (placement_[id] == lp) out.push_back(id);
    }
    return out;
}

std::uint64_t World::state_digest() const {
    std::vector<std::uint64_t> leaves;
    leaves.reserve(records_.size());
    for (const EntityRecord& rec : records_) {
        leaves.push_back(entity_digest_leaf(rec));
    }
    return combine_digest_leaves(leaves);
}

} // namespace pads
