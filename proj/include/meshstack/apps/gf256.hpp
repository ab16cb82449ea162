#pragma once

#include <array>
#include <cstdint>

namespace meshstack::apps {

// GF(2^8) arithmetic with reduction polynomial 0x11D, via log/antilog
// tables built once at startup. Addition is XOR; this type only carries
// the multiplicative structure.
class Gf256 {
 public:
  Gf256();

  uint8_t mul(uint8_t a, uint8_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }

  // Division by zero is a caller bug; asserted in debug builds.
  uint8_t div(uint8_t a, uint8_t b) const;

  uint8_t inv(uint8_t a) const { return div(1, a); }

  // a^n with n >= 0 (n is reduced mod 255 for nonzero a).
  uint8_t pow(uint8_t a, unsigned n) const;

  // The global instance; tables are immutable after construction.
  static const Gf256& instance();

 private:
  // exp_ is doubled so mul() can skip the mod-255 fold.
  std::array<uint8_t, 512> exp_{};
  std::array<uint8_t, 256> log_{};
};

}  // namespace meshstack::apps
