#ifndef PADS_BYTES_HPP
#define PADS_BYTES_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "pads/errors.hpp"

namespace pads {

/// Appends big-endian scalars and raw byte runs to a growable buffer.
/// All multi-byte integers in this project are big-endian, on the wire and in
/// digest input alike.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 24));
        buf_.push_back(static_cast<std::uint8_t>(v >> 16));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }

    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v >> 32));
        u32(static_cast<std::uint32_t>(v));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void bytes(std::span<const std::uint8_t> b) {
        buf_.insert(buf_.end(), b.begin(), b.end());
    }

    /// u32 length prefix followed by the bytes.
    void sized_bytes(std::span<const std::uint8_t> b) {
        u32(static_cast<std::uint32_t>(b.size()));
        bytes(b);
    }

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked big-endian reader over a fixed buffer. Throws ProtocolError
/// with the failing offset on truncated input.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> b) : buf_(b) {}

    std::uint8_t u8() {
        need(1);
        return buf_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = (std::uint32_t(buf_[pos_]) << 24) | (std::uint32_t(buf_[pos_ + 1]) << 16) |
                          (std::uint32_t(buf_[pos_ + 2]) << 8) | std::uint32_t(buf_[pos_ + 3]);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::vector<std::uint8_t> bytes(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    std::vector<std::uint8_t> sized_bytes() {
        std::size_t n = u32();
        return bytes(n);
    }

    std::size_t remaining() const { return buf_.size() - pos_; }
    std::size_t offset() const { return pos_; }
    bool done() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) {
        if (buf_.size() - pos_ < n) {
            throw ProtocolError("truncated input: need " + std::to_string(n) + " bytes at offset " +
                                std::to_string(pos_) + ", have " + std::to_string(buf_.size() - pos_));
        }
    }

    std::span<const std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

} // namespace pads

#endif // PADS_BYTES_HPP
