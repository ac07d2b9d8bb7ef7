#ifndef PADS_DIGEST_HPP
#define PADS_DIGEST_HPP

#include <cstdint>
#include <span>

namespace pads {

/// Incremental FNV-1a 64-bit hash. Stable for a given binary; used for world
/// state digests and test fixtures, not for untrusted input.
class Fnv64 {
public:
    static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

    void update(std::uint8_t b) {
        h_ = (h_ ^ b) * kPrime;
    }

    void update(std::span<const std::uint8_t> bytes) {
        for (std::uint8_t b : bytes) update(b);
    }

    void update_u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            update(static_cast<std::uint8_t>(v >> shift));
        }
    }

    void update_u64(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8) {
            update(static_cast<std::uint8_t>(v >> shift));
        }
    }

    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = kOffsetBasis;
};

inline std::uint64_t fnv64(std::span<const std::uint8_t> bytes) {
    Fnv64 h;
    h.update(bytes);
    return h.value();
}

} // namespace pads

#endif // PADS_DIGEST_HPP
