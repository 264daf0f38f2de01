#pragma once

#include <cstdint>
#include <string_view>

namespace loam {

// Seeded 64-bit string hash: FNV-1a with the seed mixed into the offset
// basis, plus a splitmix-style finalizer. Stable across platforms, which the
// persisted encoder layout depends on.
inline std::uint64_t hash64(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

}  // namespace loam
