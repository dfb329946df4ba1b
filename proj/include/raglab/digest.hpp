#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace raglab {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// First `n` hex characters of sha256_hex.
std::string short_digest(std::string_view data, std::size_t n = 16);

// 64-bit FNV-1a; stable across processes and platforms.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace raglab
