#ifndef SEASCAN_BYTES_HPP
#define SEASCAN_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace seascan {

// Append-only little-endian byte buffer. All multi-byte fields are encoded
// explicitly so output does not depend on host endianness.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }
    void u32(uint32_t v) {
        u16(static_cast<uint16_t>(v));
        u16(static_cast<uint16_t>(v >> 16));
    }
    void i16(int16_t v) { u16(static_cast<uint16_t>(v)); }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u32(bits);
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u32(static_cast<uint32_t>(bits));
        u32(static_cast<uint32_t>(bits >> 32));
    }
    void bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void zeros(size_t n) { buf_.insert(buf_.end(), n, uint8_t{0}); }

    // Fixed-width ASCII field, zero padded (and truncated if too long).
    void text(const std::string& s, size_t width) {
        const size_t n = s.size() < width ? s.size() : width;
        buf_.insert(buf_.end(), s.begin(), s.begin() + static_cast<ptrdiff_t>(n));
        zeros(width - n);
    }

    // Pads with zeros up to an absolute offset from the start of the buffer.
    void pad_to(size_t offset) {
        if (buf_.size() < offset) zeros(offset - buf_.size());
    }

    size_t size() const { return buf_.size(); }
    const std::vector<uint8_t>& buffer() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

// Positional little-endian reader over a borrowed range. Callers check
// remaining() before multi-field reads; individual accessors do not bound-check.
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> b) : b_(b) {}

    size_t remaining() const { return b_.size() - pos_; }
    size_t pos() const { return pos_; }
    void seek(size_t p) { pos_ = p; }
    void skip(size_t n) { pos_ += n; }

    uint8_t u8() { return b_[pos_++]; }
    uint16_t u16() {
        uint16_t v = static_cast<uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        uint32_t lo = u16();
        uint32_t hi = u16();
        return lo | (hi << 16);
    }
    int16_t i16() { return static_cast<int16_t>(u16()); }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    double f64() {
        uint64_t lo = u32();
        uint64_t hi = u32();
        uint64_t bits = lo | (hi << 32);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::string text(size_t width) {
        std::string s;
        for (size_t i = 0; i < width; ++i) {
            char c = static_cast<char>(b_[pos_ + i]);
            if (c == '\0') break;
            s.push_back(c);
        }
        pos_ += width;
        return s;
    }

private:
    std::span<const uint8_t> b_;
    size_t pos_ = 0;
};

}  // namespace seascan

#endif  // SEASCAN_BYTES_HPP
