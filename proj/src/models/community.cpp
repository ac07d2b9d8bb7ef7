#include "pads/models/community.hpp"

#include "pads/bytes.hpp"
#include "pads/errors.hpp"

namespace pads::models {

namespace {

std::uint32_t read_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

std::uint64_t read_u64(const std::uint8_t* p) {
    return (std::uint64_t(read_u32(p)) << 32) | read_u32(p + 4);
}

void write_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) {
        p[7 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
}

} // namespace

CommunityBehavior::CommunityBehavior(std::uint64_t n_entities, std::uint32_t communities,
                                     double intra_prob)
    : n_(n_entities), communities_(communities), intra_prob_(intra_prob) {
    if (communities == 0) throw ConfigError("community model needs at least 1 community");
    if (n_entities % communities != 0) {
        throw ConfigError("community model requires n_entities divisible by communities");
    }
    if (intra_prob < 0.0 || intra_prob > 1.0) {
        throw ConfigError("community intra_prob must be in [0, 1]");
    }
    size_ = n_entities / communities;
}

std::vector<std::uint8_t> CommunityBehavior::make_initial_state(std::uint32_t community) {
    ByteWriter w;
    w.u32(community);
    w.u64(0);
    return w.take();
}

std::uint32_t CommunityBehavior::community_of(std::span<const std::uint8_t> state) {
    return read_u32(state.data());
}

void CommunityBehavior::step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
                             std::span<const Interaction> inbox, const void* /*index*/,
                             Emitter& emit) {
    if (state.size() != 12) throw MigrationFault("community state size mismatch");
    write_u64(state.data() + 4, read_u64(state.data() + 4) + inbox.size());

    std::uint32_t c = read_u32(state.data());
    std::uint64_t base = std::uint64_t(c) * size_;
    bool intra = rng.bernoulli(intra_prob_);
    if (intra && size_ >= 2) {
        std::uint64_t k = rng.next_below(size_ - 1);
        std::uint64_t self_off = self - base;
        emit.emit(base + (k < self_off ? k : k + 1));
    } else if (!intra && n_ > size_) {
        std::uint64_t k = rng.next_below(n_ - size_);
        emit.emit(k < base ? k : k + size_);
    }
}

} // namespace pads::models
