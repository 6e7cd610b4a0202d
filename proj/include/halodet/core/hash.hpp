#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace halodet::core {

// FNV-1a 64-bit. Used for manifest content hashes and deterministic id
// derivation; not cryptographic.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value);

// Hash of a file's raw bytes; throws on unreadable path.
std::uint64_t fnv1a64_file(const std::string& path);

} // namespace halodet::core
