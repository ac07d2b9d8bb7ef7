#include "pads/models/synthetic.hpp"

#include <bit>

#include "pads/bytes.hpp"
#include "pads/errors.hpp"

namespace pads::models {

namespace {

std::uint64_t read_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

void write_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) {
        p[7 - i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
}

} // namespace

SyntheticBehavior::SyntheticBehavior(std::uint64_t n_entities, Traffic traffic,
                                     double busy_us_per_weight,
                                     std::function<void(double)> burn_us)
    : n_(n_entities), traffic_(traffic), busy_us_per_weight_(busy_us_per_weight),
      burn_us_(std::move(burn_us)) {}

std::vector<std::uint8_t> SyntheticBehavior::make_initial_state(double weight) {
    ByteWriter w;
    w.f64(weight);
    w.u64(0);
    return w.take();
}

void SyntheticBehavior::step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
                             std::span<const Interaction> inbox, const void* /*index*/,
                             Emitter& emit) {
    if (state.size() != 16) throw MigrationFault("synthetic state size mismatch");
    write_u64(state.data() + 8, read_u64(state.data() + 8) + inbox.size());

    double weight = std::bit_cast<double>(read_u64(state.data()));
    if (busy_us_per_weight_ > 0.0 && weight > 0.0 && burn_us_) {
        burn_us_(weight * busy_us_per_weight_);
    }
    if (traffic_ == Traffic::Uniform && n_ > 1) {
        std::uint64_t k = rng.next_below(n_ - 1);
        emit.emit(k < self ? k : k + 1);
    }
}

} // namespace pads::models
