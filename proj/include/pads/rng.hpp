#ifndef PADS_RNG_HPP
#define PADS_RNG_HPP

#include <cstdint>

namespace pads {

/**
 * Small deterministic PRNG with 8 bytes of state (splitmix64).
 *
 * Every simulated entity carries one of these; the state migrates with the
 * entity, so random draws never depend on which container executes it.
 * std::mt19937 is unsuitable here: 2.5 KiB of state per entity would dominate
 * migration payloads.
 */
class SplitMix64 {
public:
    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_ = 0;
};

/// One splitmix64 scramble step; used to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for an entity's own RNG: a pure function of (global seed, entity id),
/// never of placement.
inline std::uint64_t entity_seed(std::uint64_t global_seed, std::uint64_t entity_id) {
    return mix64(global_seed + 0x9E3779B97F4A7C15ULL * (entity_id + 1));
}

/// Seed for model setup draws (initial positions etc.), kept distinct from the
/// entity's runtime stream so setup does not replay into the first step.
inline std::uint64_t setup_seed(std::uint64_t global_seed, std::uint64_t entity_id) {
    return mix64((global_seed ^ 0xA5A5A5A55A5A5A5AULL) + 0x9E3779B97F4A7C15ULL * (entity_id + 1));
}

} // namespace pads

#endif // PADS_RNG_HPP
