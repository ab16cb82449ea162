#include "meshstack/proto/checksum.hpp"

#include "meshstack/proto/bytes.hpp"

namespace meshstack::proto {

void ChecksumAccum::add(std::span<const uint8_t> bytes) {
  size_t i = 0;
  if (have_odd_ && !bytes.empty()) {
    sum_ += uint16_t(uint16_t(odd_) << 8 | bytes[0]);
    have_odd_ = false;
    i = 1;
  }
  for (; i + 1 < bytes.size(); i += 2) sum_ += get_u16(bytes.data() + i);
  if (i < bytes.size()) {
    odd_ = bytes[i];
    have_odd_ = true;
  }
}

void ChecksumAccum::add_u16(uint16_t v) {
  uint8_t b[2];
  put_u16(b, v);
  add({b, 2});
}

void ChecksumAccum::add_u32(uint32_t v) {
  uint8_t b[4];
  put_u32(b, v);
  add({b, 4});
}

uint16_t ChecksumAccum::sum16() const {
  uint64_t s = sum_;
  if (have_odd_) s += uint16_t(uint16_t(odd_) << 8);
  while (s >> 16) s = (s & 0xFFFF) + (s >> 16);
  return uint16_t(s);
}

uint16_t ones_sum16(std::span<const uint8_t> bytes) {
  ChecksumAccum a;
  a.add(bytes);
  return a.sum16();
}

uint16_t internet_checksum(std::span<const uint8_t> bytes) {
  ChecksumAccum a;
  a.add(bytes);
  return a.finish();
}

uint16_t checksum_update32(uint16_t ck, uint32_t old_word, uint32_t new_word) {
  ChecksumAccum a;
  a.add_u16(uint16_t(~ck));
  a.add_u16(uint16_t(~(old_word >> 16)));
  a.add_u16(uint16_t(~(old_word & 0xFFFF)));
  a.add_u32(new_word);
  return a.finish();
}

uint16_t l4_checksum(uint32_t src_ip, uint32_t dst_ip, uint8_t protocol,
                     std::span<const uint8_t> segment) {
  ChecksumAccum a;
  a.add_u32(src_ip);
  a.add_u32(dst_ip);
  a.add_u16(protocol);
  a.add_u16(uint16_t(segment.size()));
  a.add(segment);
  return a.finish();
}

}  // namespace meshstack::proto
