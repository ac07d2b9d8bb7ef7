#include "pads/models/wireless.hpp"

#include "pads/bytes.hpp"
#include "pads/errors.hpp"

namespace pads::models {

namespace {

constexpr std::size_t kStateSize = 16;

std::uint32_t read_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

void write_u32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

std::uint64_t read_u64(const std::uint8_t* p) {
    return (std::uint64_t(read_u32(p)) << 32) | read_u32(p + 4);
}

void write_u64(std::uint8_t* p, std::uint64_t v) {
    write_u32(p, static_cast<std::uint32_t>(v >> 32));
    write_u32(p + 4, static_cast<std::uint32_t>(v));
}

std::uint64_t cell_key(std::uint32_t x, std::uint32_t y) {
    return (std::uint64_t(x) << 32) | y;
}

} // namespace

WirelessBehavior::WirelessBehavior(std::uint32_t grid_width, std::uint32_t grid_height,
                                   std::uint32_t radius)
    : width_(grid_width), height_(grid_height), radius_(radius) {
    if (width_ == 0 || height_ == 0) throw ConfigError("wireless grid must be non-empty");
}

std::vector<std::uint8_t> WirelessBehavior::make_initial_state(std::uint64_t global_seed,
                                                               EntityId id,
                                                               std::uint32_t grid_width,
                                                               std::uint32_t grid_height) {
    SplitMix64 rng(setup_seed(global_seed, id));
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(rng.next_below(grid_width)));
    w.u32(static_cast<std::uint32_t>(rng.next_below(grid_height)));
    w.u64(0);
    return w.take();
}

std::pair<std::uint32_t, std::uint32_t> WirelessBehavior::position(
    std::span<const std::uint8_t> state) {
    return {read_u32(state.data()), read_u32(state.data() + 4)};
}

std::uint64_t WirelessBehavior::beacons_received(std::span<const std::uint8_t> state) {
    return read_u64(state.data() + 8);
}

std::vector<std::uint8_t> WirelessBehavior::directory_entry(
    EntityId /*self*/, std::span<const std::uint8_t> state) {
    return std::vector<std::uint8_t>(state.begin(), state.begin() + 8);
}

std::shared_ptr<const void> WirelessBehavior::build_index(const DirectoryBlob& directory) {
    auto index = std::make_shared<PositionIndex>();
    // directory is sorted by entity id, so per-cell lists come out sorted
    for (const auto& [id, entry] : directory) {
        std::uint32_t x = read_u32(entry.data());
        std::uint32_t y = read_u32(entry.data() + 4);
        index->cells[cell_key(x, y)].push_back(id);
    }
    return index;
}

void WirelessBehavior::step(EntityId self, std::vector<std::uint8_t>& state, SplitMix64& rng,
                            std::span<const Interaction> inbox, const void* index,
                            Emitter& emit) {
    if (state.size() != kStateSize) throw MigrationFault("wireless state size mismatch");
    write_u64(state.data() + 8, read_u64(state.data() + 8) + inbox.size());

    std::uint32_t x = read_u32(state.data());
    std::uint32_t y = read_u32(state.data() + 4);
    switch (rng.next_below(5)) {
        case 0: break;                            // stay
        case 1: y = y > 0 ? y - 1 : 0; break;     // north
        case 2: y = std::min(y + 1, height_ - 1); break; // south
        case 3: x = std::min(x + 1, width_ - 1); break;  // east
        case 4: x = x > 0 ? x - 1 : 0; break;     // west
    }
    write_u32(state.data(), x);
    write_u32(state.data() + 4, y);

    if (radius_ == 0 || index == nullptr) return;
    const auto& cells = static_cast<const PositionIndex*>(index)->cells;
    std::uint32_t x_lo = x >= radius_ ? x - radius_ : 0;
    std::uint32_t y_lo = y >= radius_ ? y - radius_ : 0;
    std::uint32_t x_hi = std::min(x + radius_, width_ - 1);
    std::uint32_t y_hi = std::min(y + radius_, height_ - 1);
    for (std::uint32_t cx = x_lo; cx <= x_hi; ++cx) {
        for (std::uint32_t cy = y_lo; cy <= y_hi; ++cy) {
            auto it = cells.find(cell_key(cx, cy));
            if (it == cells.end()) continue;
            for (EntityId other : it->second) {
                if (other != self) emit.emit(other);
            }
        }
    }
}

} // namespace pads::models
