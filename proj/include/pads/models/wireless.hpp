#ifndef PADS_MODELS_WIRELESS_HPP
#define PADS_MODELS_WIRELESS_HPP

#include <unordered_map>

#include "pads/behavior.hpp"

namespace pads::models {

/**
 * Proximity beacon model on an integer grid: each step the entity random-walks
 * one cell (stay/N/S/E/W, clamped to the grid) and then beacons every entity
 * within Chebyshev distance r, looked up in a global position index rebuilt at
 * each barrier. r = 0 means the radio is off. The payload counter tallies
 * received beacons.
 *
 * State layout: x u32, y u32, beacons_received u64.
 */
class WirelessBehavior : public Behavior {
public:
    WirelessBehavior(std::uint32_t grid_width, std::uint32_t grid_height, std::uint32_t radius);

    bool uses_directory() const override { return true; }
    std::vector<std::uint8_t> directory_entry(EntityId self,
                                              std::span<const std::uint8_t> state) override;
    std::shared_ptr<const void> build_index(const DirectoryBlob& directory) override;

    void step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
              std::span<const Interaction> inbox, const void* index, Emitter& emit) override;

    static std::vector<std::uint8_t> make_initial_state(std::uint64_t global_seed, EntityId id,
                                                        std::uint32_t grid_width,
                                                        std::uint32_t grid_height);
    static std::pair<std::uint32_t, std::uint32_t> position(std::span<const std::uint8_t> state);
    static std::uint64_t beacons_received(std::span<const std::uint8_t> state);

    struct PositionIndex {
        std::unordered_map<std::uint64_t, std::vector<EntityId>> cells; // sorted id lists
    };

private:
    std::uint32_t width_;
    std::uint32_t height_;
    std::uint32_t radius_;
};

} // namespace pads::models

#endif // PADS_MODELS_WIRELESS_HPP
