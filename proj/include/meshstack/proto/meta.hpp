#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/proto/eth.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::proto {

// Layer bits: which protocol layers the metadata fields describe.
inline constexpr uint8_t kLayerEth = 0x01;
inline constexpr uint8_t kLayerVlan = 0x02;
inline constexpr uint8_t kLayerIp = 0x04;
inline constexpr uint8_t kLayerUdp = 0x08;
inline constexpr uint8_t kLayerTcp = 0x10;

// What kind of message a tile is looking at; Data is a packet moving down
// or up the stack, the rest are tile-to-tile service messages.
enum class MsgType : uint8_t {
  Data = 0,
  AppNotify = 1,    // transport -> application delivery note
  BufWrite = 2,     // ring buffer write request
  BufWriteAck = 3,
  BufRead = 4,
  BufReadResp = 5,
  CtrlUpdate = 6,   // control-plane table update
  CtrlAck = 7,
  TcpOpen = 8,      // application -> TCP requests
  TcpSend = 9,
  TcpRecv = 10,
  TcpClose = 11,
  LogReadReq = 12,
  LogReadResp = 13,
  Raw = 14,         // opaque payload, no parsed fields
};

const char* to_string(MsgType t);

// Parsed-header summary carried as the single metadata flit of every
// data-plane message. Each tile deepens it as it strips its own header, so
// downstream tiles route on fields without re-parsing payload bytes.
// Serialized big-endian into exactly one 64-byte flit.
struct PacketMeta {
  uint8_t layers = 0;
  MsgType msg_type = MsgType::Data;
  MacAddr eth_dst{};
  MacAddr eth_src{};
  uint16_t ethertype = 0;
  uint16_t vlan_tci = 0;
  uint32_t ip_src = 0;
  uint32_t ip_dst = 0;
  uint8_t ip_proto = 0;
  uint8_t ip_ttl = 0;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint16_t l4_len = 0;  // transport payload length
  std::optional<uint16_t> payload_sum16;
  uint32_t tcp_seq = 0;
  uint32_t tcp_ack = 0;
  uint8_t tcp_flags = 0;
  uint16_t tcp_window = 0;
  // Type-specific scalars (ring offsets, generations, log indices, ...).
  uint32_t aux_a = 0;
  uint32_t aux_b = 0;
  uint32_t aux_c = 0;

  std::array<uint8_t, 64> serialize() const;
  static Result<PacketMeta> parse(ByteView bytes);

  bool has(uint8_t layer_bit) const { return layers & layer_bit; }
};

// Stable 64-bit hash of the flow 4-tuple + protocol, used by flow-affine
// load balancing. Seeded so independent balancers decorrelate.
uint64_t flow_hash(const PacketMeta& m, uint64_t seed);

}  // namespace meshstack::proto
