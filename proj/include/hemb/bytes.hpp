#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace hemb {

// Little-endian float32 serialization helpers, shared by the checkpoint
// format and parameter checksums.

inline void append_f32_le(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

inline float read_f32_le(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  uint32_t bits = static_cast<uint32_t>(u[0]) | (static_cast<uint32_t>(u[1]) << 8) |
                  (static_cast<uint32_t>(u[2]) << 16) | (static_cast<uint32_t>(u[3]) << 24);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline uint64_t fnv1a64(std::string_view bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace hemb
