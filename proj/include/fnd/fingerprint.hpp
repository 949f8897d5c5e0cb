#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fnd {

/// 64-bit FNV-1a. Stable across platforms; used for config and vocabulary
/// fingerprints, never for anything security-related.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value);

inline std::string fingerprint_of(std::string_view canonical) { return to_hex(fnv1a64(canonical)); }

}  // namespace fnd
