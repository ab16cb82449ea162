#pragma once

#include <cstdint>
#include <vector>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::proto {

struct UdpDatagram {
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  std::vector<uint8_t> payload;
};

struct UdpParsed {
  UdpDatagram dgram;
  bool checksum_present = false;
  // Folded one's-complement sum of the payload, computed while verifying;
  // lets a downstream transmitter emit its header before seeing the payload.
  uint16_t payload_sum16 = 0;
};

// Parse and verify one UDP datagram carried over IPv4. A zero checksum
// field means "no checksum" and is accepted; otherwise the pseudo-header
// checksum must verify.
Result<UdpParsed> udp_parse(uint32_t src_ip, uint32_t dst_ip, ByteView bytes);

// Build with checksum; a computed sum of 0x0000 is transmitted as 0xFFFF.
std::vector<uint8_t> udp_build(uint32_t src_ip, uint32_t dst_ip,
                               const UdpDatagram& d);

// Same wire bytes as udp_build, but the payload contribution to the
// checksum comes from the precomputed folded sum instead of a payload walk.
std::vector<uint8_t> udp_build_with_sum(uint32_t src_ip, uint32_t dst_ip,
                                        const UdpDatagram& d,
                                        uint16_t payload_sum16);

// Header checksum value alone (for emitting headers ahead of the payload).
uint16_t udp_checksum_from_sum(uint32_t src_ip, uint32_t dst_ip,
                               uint16_t src_port, uint16_t dst_port,
                               uint16_t payload_len, uint16_t payload_sum16);

}  // namespace meshstack::proto
