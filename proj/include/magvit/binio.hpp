#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "magvit/errors.hpp"

namespace magvit::binio {

// Little-endian scalar I/O, written byte-wise so the formats are
// host-endianness independent.

inline void put_u8(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline void put_u16(std::ostream& os, std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    os.write(b, 2);
}

inline void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

inline std::uint8_t get_u8(std::istream& is, const std::string& what) {
    int c = is.get();
    if (c == EOF) throw DataError("truncated file while reading " + what);
    return static_cast<std::uint8_t>(c);
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError("truncated file while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint16_t get_u16(std::istream& is, const std::string& what) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2))
        throw DataError("truncated file while reading " + what);
    return static_cast<std::uint16_t>(b[0]) | (static_cast<std::uint16_t>(b[1]) << 8);
}

inline float get_f32(std::istream& is, const std::string& what) {
    std::uint32_t bits = get_u32(is, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& format) {
    char got[4];
    if (!is.read(got, 4)) throw DataError("truncated file while reading " + format + " magic");
    if (std::memcmp(got, magic, 4) != 0)
        throw DataError("bad magic for " + format + " file (expected \"" + magic + "\")");
}

inline void put_magic(std::ostream& os, const char (&magic)[5]) {
    os.write(magic, 4);
}

} // namespace magvit::binio
