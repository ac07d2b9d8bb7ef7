#ifndef PADS_MODELS_COMMUNITY_HPP
#define PADS_MODELS_COMMUNITY_HPP

#include "pads/behavior.hpp"

namespace pads::models {

/**
 * Synthetic community workload with a constructively known optimal partition:
 * entities belong to equally-sized contiguous communities and each step send
 * exactly one message, to a uniform intra-community peer with probability q
 * and to a uniform peer outside the community otherwise. Mapping community c
 * onto LP c mod pool gives the best possible local-message ratio of q.
 *
 * State layout: community u32, messages_received u64.
 */
class CommunityBehavior : public Behavior {
public:
    CommunityBehavior(std::uint64_t n_entities, std::uint32_t communities, double intra_prob);

    void step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
              std::span<const Interaction> inbox, const void* index, Emitter& emit) override;

    static std::vector<std::uint8_t> make_initial_state(std::uint32_t community);
    static std::uint32_t community_of(std::span<const std::uint8_t> state);

    std::uint64_t community_size() const { return size_; }

private:
    std::uint64_t n_;
    std::uint32_t communities_;
    std::uint64_t size_;
    double intra_prob_;
};

} // namespace pads::models

#endif // PADS_MODELS_COMMUNITY_HPP
