#ifndef PADS_MODELS_SYNTHETIC_HPP
#define PADS_MODELS_SYNTHETIC_HPP

#include <functional>

#include "pads/behavior.hpp"

namespace pads::models {

/**
 * Configurable load workload for balance and speedup scenarios: each entity
 * optionally burns busy time proportional to its weight and optionally sends
 * one message per step to a uniformly random peer. The weight is duplicated
 * into the state so the handler stays a pure function of its inputs.
 *
 * State layout: weight f64, messages_received u64.
 */
class SyntheticBehavior : public Behavior {
public:
    enum class Traffic : std::uint8_t { None = 0, Uniform = 1 };

    SyntheticBehavior(std::uint64_t n_entities, Traffic traffic, double busy_us_per_weight,
                      std::function<void(double)> burn_us);

    void step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
              std::span<const Interaction> inbox, const void* index, Emitter& emit) override;

    static std::vector<std::uint8_t> make_initial_state(double weight);

private:
    std::uint64_t n_;
    Traffic traffic_;
    double busy_us_per_weight_;
    std::function<void(double)> burn_us_;
};

} // namespace pads::models

#endif // PADS_MODELS_SYNTHETIC_HPP
