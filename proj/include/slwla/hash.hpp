#pragma once

#include <cstdint>
#include <string_view>

namespace slwla {

/// 64-bit FNV-1a over the raw bytes of `text`.
constexpr std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace slwla
