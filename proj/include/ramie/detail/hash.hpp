#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "ramie/core.hpp"

namespace ramie::detail {

// FNV-1a 64-bit. Non-cryptographic; used for feature hashing, artifact
// fingerprints and manifest change detection.
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline constexpr std::uint64_t fnv1a64(std::string_view data,
                                       std::uint64_t seed = kFnvOffset) {
    std::uint64_t hash = seed;
    for (char ch : data) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= kFnvPrime;
    }
    return hash;
}

// splitmix64 finalizer; decorrelates bucket and sign bits of feature hashes.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view data) {
    return "fnv1a:" + to_hex(fnv1a64(data));
}

inline std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path);
    std::uint64_t hash = kFnvOffset;
    char buf[1 << 15];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        hash = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), hash);
        if (!in) break;
    }
    return "fnv1a:" + to_hex(hash);
}

}  // namespace ramie::detail
