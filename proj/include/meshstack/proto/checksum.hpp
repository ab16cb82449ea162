#pragma once

#include <cstdint>
#include <span>

namespace meshstack::proto {

// One's-complement accumulator over big-endian 16-bit words (the internet
// checksum arithmetic). add() accepts arbitrary chunk boundaries; a dangling
// odd byte pairs with the first byte of the next chunk.
class ChecksumAccum {
 public:
  void add(std::span<const uint8_t> bytes);
  void add_u16(uint16_t v);
  void add_u32(uint32_t v);

  // Folded (but not inverted) sum; a trailing odd byte is padded with zero.
  uint16_t sum16() const;
  // Inverted sum, as stored in header checksum fields.
  uint16_t finish() const { return uint16_t(~sum16()); }

 private:
  uint64_t sum_ = 0;
  bool have_odd_ = false;
  uint8_t odd_ = 0;
};

uint16_t ones_sum16(std::span<const uint8_t> bytes);
uint16_t internet_checksum(std::span<const uint8_t> bytes);

// UDP/TCP checksum over the IPv4 pseudo-header plus the whole segment
// (header and payload, with the checksum field zeroed by the caller).
uint16_t l4_checksum(uint32_t src_ip, uint32_t dst_ip, uint8_t protocol,
                     std::span<const uint8_t> segment);

// Incremental update of a stored checksum after one 32-bit covered word
// changes (address rewriting): ck' = ~(~ck + ~old + new).
uint16_t checksum_update32(uint16_t ck, uint32_t old_word, uint32_t new_word);

}  // namespace meshstack::proto
