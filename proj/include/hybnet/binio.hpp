#pragma once

// Little-endian byte serialization helpers shared by the binary file formats.

#include <cstring>
#include <fstream>
#include <string>

#include "hybnet/common.hpp"

namespace hybnet::io {

// Raised on malformed or truncated binary input; carries the byte offset at
// which decoding failed.
struct FormatError : std::runtime_error {
    FormatError(const std::string& what, std::size_t at_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(at_offset) + ")"),
          offset(at_offset) {}
    std::size_t offset;
};

inline void put_bytes(std::string& out, const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
}
inline void put_u8(std::string& out, std::uint8_t v) { put_bytes(out, &v, 1); }
inline void put_u16(std::string& out, std::uint16_t v) {
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
    put_bytes(out, b, 2);
}
inline void put_u32(std::string& out, std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                               static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 24)};
    put_bytes(out, b, 4);
}
inline void put_i32(std::string& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}
inline void put_f32(std::string& out, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(out, u);
}

class Reader {
public:
    Reader(const char* data, std::size_t size, std::string what)
        : data_(data), size_(size), what_(std::move(what)) {}
    Reader(const std::string& buf, std::string what)
        : Reader(buf.data(), buf.size(), std::move(what)) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }
    bool at_end() const { return pos_ == size_; }

    void raw(void* p, std::size_t n) {
        if (pos_ + n > size_) throw FormatError(what_ + ": truncated", pos_);
        std::memcpy(p, data_ + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        std::uint8_t v;
        raw(&v, 1);
        return v;
    }
    std::uint16_t u16() {
        std::uint8_t b[2];
        raw(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        std::uint8_t b[4];
        raw(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        return lo | (static_cast<std::uint64_t>(u32()) << 32);
    }
    float f32() {
        const std::uint32_t u = u32();
        float v;
        std::memcpy(&v, &u, 4);
        return v;
    }

private:
    const char* data_;
    std::size_t size_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path, 0);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return buf;
}

inline void write_file(const std::string& path, const std::string& buf) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing", 0);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("short write to " + path, 0);
}

}  // namespace hybnet::io
