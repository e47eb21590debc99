#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace softdtw {

// Independent generator derived from a master seed and a stream name, so
// e.g. the "split" and "init" streams can be re-seeded separately.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace softdtw
