#ifndef PADS_MODELS_GOSSIP_HPP
#define PADS_MODELS_GOSSIP_HPP

#include "pads/behavior.hpp"
#include "pads/models/graph.hpp"

namespace pads::models {

/**
 * Push gossip with a single probabilistic forwarding round per node: on first
 * becoming informed (or starting informed), a node forwards to each neighbor
 * independently with probability p, once per neighbor over the whole run.
 * Informed is monotone.
 *
 * State layout: informed u8, forwarded u8, p f64, neighbor count u32,
 * neighbor ids u64 each. The per-entity RNG lives in the entity record.
 */
class GossipBehavior : public Behavior {
public:
    void step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
              std::span<const Interaction> inbox, const void* index, Emitter& emit) override;

    static std::vector<std::uint8_t> make_initial_state(bool informed, double forward_prob,
                                                        std::span<const std::uint32_t> neighbors);
    static bool informed(std::span<const std::uint8_t> state);
};

} // namespace pads::models

#endif // PADS_MODELS_GOSSIP_HPP
