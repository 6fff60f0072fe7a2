#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace repograph {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);

/// Hex SHA-256 of `data`, used as content digests in persisted artifacts.
inline std::string sha256_hex(std::string_view data) {
    const auto d = sha256(data);
    return to_hex(d);
}

/// 64-bit FNV-1a; used for feature hashing where cryptographic strength is irrelevant.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace repograph
