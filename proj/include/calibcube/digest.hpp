#ifndef CALIBCUBE_DIGEST_HPP
#define CALIBCUBE_DIGEST_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace calibcube {

/// FNV-1a 64-bit over a byte range. Used for config digests and RNG
/// sub-stream tags; not cryptographic.
inline uint64_t fnv1a64(std::string_view bytes,
                        uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace calibcube

#endif  // CALIBCUBE_DIGEST_HPP
