#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace ordirs::util {

/// FNV-1a 64-bit hash. Stable across platforms, used for cassette request
/// digests and scripted-model prompt identities.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string digest_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

}  // namespace ordirs::util
