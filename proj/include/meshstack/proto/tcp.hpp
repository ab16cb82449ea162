#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::proto {

inline constexpr uint8_t kTcpFin = 0x01;
inline constexpr uint8_t kTcpSyn = 0x02;
inline constexpr uint8_t kTcpRst = 0x04;
inline constexpr uint8_t kTcpPsh = 0x08;
inline constexpr uint8_t kTcpAck = 0x10;

std::string tcp_flags_to_string(uint8_t flags);

struct TcpSegment {
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint32_t seq = 0;
  uint32_t ack = 0;
  uint8_t flags = 0;
  uint16_t window = 0;
  uint16_t urgent = 0;
  std::vector<uint8_t> options;  // raw bytes; build pads to a 4-byte multiple
  std::vector<uint8_t> payload;
};

Result<TcpSegment> tcp_parse(uint32_t src_ip, uint32_t dst_ip, ByteView bytes);
std::vector<uint8_t> tcp_build(uint32_t src_ip, uint32_t dst_ip,
                               const TcpSegment& s);

}  // namespace meshstack::proto
