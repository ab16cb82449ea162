#include "meshstack/apps/gf256.hpp"

#include <cassert>

namespace meshstack::apps {

Gf256::Gf256() {
  // Generator 2 is primitive for 0x11D; walk its powers to fill the tables.
  unsigned x = 1;
  for (unsigned i = 0; i < 255; ++i) {
    exp_[i] = uint8_t(x);
    exp_[i + 255] = uint8_t(x);
    log_[x] = uint8_t(i);
    x <<= 1;
    if (x & 0x100) x ^= 0x11D;
  }
  exp_[510] = exp_[0];
  log_[0] = 0;  // unused; mul/div guard zero explicitly
}

uint8_t Gf256::div(uint8_t a, uint8_t b) const {
  assert(b != 0 && "GF(256) division by zero");
  if (a == 0) return 0;
  return exp_[255 + log_[a] - log_[b]];
}

uint8_t Gf256::pow(uint8_t a, unsigned n) const {
  if (n == 0) return 1;
  if (a == 0) return 0;
  return exp_[(unsigned(log_[a]) * n) % 255];
}

const Gf256& Gf256::instance() {
  static const Gf256 gf;
  return gf;
}

}  // namespace meshstack::apps
