#ifndef PADS_BEHAVIOR_HPP
#define PADS_BEHAVIOR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "pads/rng.hpp"
#include "pads/types.hpp"

namespace pads {

/// Collects the interactions one entity emits during its step. The engine
/// stamps src, send/deliver steps and the per-source sequence number.
class Emitter {
public:
    void emit(EntityId dst, std::vector<std::uint8_t> payload = {}) {
        out_.emplace_back(dst, std::move(payload));
    }

    std::size_t count() const { return out_.size(); }
    std::vector<std::pair<EntityId, std::vector<std::uint8_t>>>& take() { return out_; }

private:
    std::vector<std::pair<EntityId, std::vector<std::uint8_t>>> out_;
};

/// Model-wide published entries for one step, merged across LPs in ascending
/// entity id order at the barrier. Used by models that need a global view
/// (the wireless position index); empty for everything else.
using DirectoryBlob = std::vector<std::pair<EntityId, std::vector<std::uint8_t>>>;

/**
 * A model behavior: a pure function of (state bytes, sorted inbox, entity RNG,
 * per-step index). Behavior objects are shared across LP workers and must hold
 * no mutable state; anything per-entity lives in the entity's state bytes.
 */
class Behavior {
public:
    virtual ~Behavior() = default;

    /// Executes one entity step. The inbox is sorted by (src, seq). May mutate
    /// the state bytes and the RNG, and emit interactions for the next step.
    virtual void step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
                      std::span<const Interaction> inbox, const void* index, Emitter& emit) = 0;

    /// True when the model needs the per-step global directory (and pays the
    /// cost of publishing and merging it every barrier).
    virtual bool uses_directory() const { return false; }

    /// Bytes this entity publishes into the per-step directory; empty if the
    /// model needs no global view.
    virtual std::vector<std::uint8_t> directory_entry(EntityId /*self*/,
                                                      std::span<const std::uint8_t> /*state*/) {
        return {};
    }

    /// Builds the per-step index from the merged directory. Called once per
    /// worker per step; the result is handed back via the `index` argument.
    virtual std::shared_ptr<const void> build_index(const DirectoryBlob& /*directory*/) {
        return nullptr;
    }
};

/// Kind -> implementation table for one run.
using BehaviorTable = std::map<BehaviorKind, std::shared_ptr<Behavior>>;

} // namespace pads

#endif // PADS_BEHAVIOR_HPP
