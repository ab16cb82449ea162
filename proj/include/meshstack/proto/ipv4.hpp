#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::proto {

inline constexpr uint8_t kProtoIpInIp = 4;
inline constexpr uint8_t kProtoTcp = 6;
inline constexpr uint8_t kProtoUdp = 17;

constexpr uint32_t ipv4_addr(uint8_t a, uint8_t b, uint8_t c, uint8_t d) {
  return uint32_t(a) << 24 | uint32_t(b) << 16 | uint32_t(c) << 8 | d;
}

std::string ipv4_to_string(uint32_t addr);
Result<uint32_t> ipv4_from_string(const std::string& s);

// An IPv4 packet. Fragmentation is not modeled: parse rejects fragments and
// build always sets DF. Options are preserved on parse; build emits them
// zero-padded to a 4-byte multiple.
struct Ipv4Packet {
  uint8_t dscp_ecn = 0;
  uint16_t identification = 0;
  uint8_t ttl = 64;
  uint8_t protocol = 0;
  uint32_t src = 0;
  uint32_t dst = 0;
  std::vector<uint8_t> options;
  std::vector<uint8_t> payload;
};

Result<Ipv4Packet> ipv4_parse(ByteView bytes);
std::vector<uint8_t> ipv4_build(const Ipv4Packet& p);

size_t ipv4_header_len(const Ipv4Packet& p);

}  // namespace meshstack::proto
