#pragma once
#include <cstdint>
#include <string>
#include <string_view>

namespace crosstok {

// 64-bit FNV-1a. Used for document ids, input digests and seed derivation.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex16(uint64_t v);

// Deterministic, platform-independent RNG (splitmix64). std:: engines are
// portable but the distributions are not, so draws are done by hand.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n), unbiased via rejection.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = ~uint64_t{0} - ~uint64_t{0} % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  int64_t range_int(int64_t lo, int64_t hi) {  // closed [lo, hi]
    return lo + int64_t(below(uint64_t(hi - lo + 1)));
  }

  double range_real(double lo, double hi) { return lo + next_double() * (hi - lo); }

 private:
  uint64_t state_;
};

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  Rng r(seed ^ (salt * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
  return r.next_u64();
}

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);  // throws Error(CorruptModel) on bad input

std::string iso8601_utc_now();
uint64_t file_digest(const std::string& path);  // FNV-1a of the file bytes
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Formats a double so that parsing it back yields the same bits.
std::string format_double(double v);

}  // namespace crosstok
