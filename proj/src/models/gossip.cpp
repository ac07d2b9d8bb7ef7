#include "pads/models/gossip.hpp"

#include <bit>

#include "pads/bytes.hpp"
#include "pads/errors.hpp"

namespace pads::models {

namespace {

constexpr std::size_t kInformedOff = 0;
constexpr std::size_t kForwardedOff = 1;
constexpr std::size_t kProbOff = 2;
constexpr std::size_t kCountOff = 10;
constexpr std::size_t kNeighborsOff = 14;

std::uint32_t read_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

std::uint64_t read_u64(const std::uint8_t* p) {
    return (std::uint64_t(read_u32(p)) << 32) | read_u32(p + 4);
}

} // namespace

std::vector<std::uint8_t> GossipBehavior::make_initial_state(
    bool informed, double forward_prob, std::span<const std::uint32_t> neighbors) {
    ByteWriter w;
    w.u8(informed ? 1 : 0);
    w.u8(0);
    w.f64(forward_prob);
    w.u32(static_cast<std::uint32_t>(neighbors.size()));
    for (std::uint32_t nb : neighbors) w.u64(nb);
    return w.take();
}

bool GossipBehavior::informed(std::span<const std::uint8_t> state) {
    return !state.empty() && state[kInformedOff] != 0;
}

void GossipBehavior::step(EntityId /*self*/, std::vector<std::uint8_t>& state, SplitMix64& rng,
                          std::span<const Interaction> inbox, const void* /*index*/,
                          Emitter& emit) {
    if (state.size() < kNeighborsOff) {
        throw MigrationFault("gossip state too short");
    }
    bool informed = state[kInformedOff] != 0;
    bool forwarded = state[kForwardedOff] != 0;
    if (!informed && !inbox.empty()) {
        informed = true;
        state[kInformedOff] = 1;
    }
    if (informed && !forwarded) {
        state[kForwardedOff] = 1;
        double p = std::bit_cast<double>(read_u64(state.data() + kProbOff));
        std::uint32_t count = read_u32(state.data() + kCountOff);
        for (std::uint32_t i = 0; i < count; ++i) {
            EntityId neighbor = read_u64(state.data() + kNeighborsOff + 8 * i);
            if (rng.bernoulli(p)) emit.emit(neighbor);
        }
    }
}

} // namespace pads::models
