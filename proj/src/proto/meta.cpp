#include "meshstack/proto/meta.hpp"

#include <algorithm>

namespace meshstack::proto {

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::Data: return "data";
    case MsgType::AppNotify: return "app_notify";
    case MsgType::BufWrite: return "buf_write";
    case MsgType::BufWriteAck: return "buf_write_ack";
    case MsgType::BufRead: return "buf_read";
    case MsgType::BufReadResp: return "buf_read_resp";
    case MsgType::CtrlUpdate: return "ctrl_update";
    case MsgType::CtrlAck: return "ctrl_ack";
    case MsgType::TcpOpen: return "tcp_open";
    case MsgType::TcpSend: return "tcp_send";
    case MsgType::TcpRecv: return "tcp_recv";
    case MsgType::TcpClose: return "tcp_close";
    case MsgType::LogReadReq: return "log_read_req";
    case MsgType::LogReadResp: return "log_read_resp";
    case MsgType::Raw: return "raw";
  }
  return "unknown";
}

namespace {
constexpr uint8_t kFlagPayloadSum = 0x01;
}

std::array<uint8_t, 64> PacketMeta::serialize() const {
  std::array<uint8_t, 64> b{};
  b[0] = layers;
  b[1] = uint8_t(msg_type);
  std::copy(eth_dst.begin(), eth_dst.end(), b.begin() + 2);
  std::copy(eth_src.begin(), eth_src.end(), b.begin() + 8);
  put_u16(&b[14], ethertype);
  put_u16(&b[16], vlan_tci);
  put_u32(&b[18], ip_src);
  put_u32(&b[22], ip_dst);
  b[26] = ip_proto;
  b[27] = ip_ttl;
  put_u16(&b[28], src_port);
  put_u16(&b[30], dst_port);
  put_u16(&b[32], l4_len);
  put_u16(&b[34], payload_sum16.value_or(0));
  b[36] = payload_sum16 ? kFlagPayloadSum : 0;
  put_u32(&b[37], tcp_seq);
  put_u32(&b[41], tcp_ack);
  b[45] = tcp_flags;
  put_u16(&b[46], tcp_window);
  put_u32(&b[48], aux_a);
  put_u32(&b[52], aux_b);
  put_u32(&b[56], aux_c);
  return b;
}

Result<PacketMeta> PacketMeta::parse(ByteView b) {
  using R = Result<PacketMeta>;
  if (b.size() < 64) return R::failure("metadata flit shorter than 64 bytes");
  if (b[1] > uint8_t(MsgType::Raw))
    return R::failure("unknown message type in metadata");
  PacketMeta m;
  m.layers = b[0];
  m.msg_type = MsgType(b[1]);
  std::copy(b.begin() + 2, b.begin() + 8, m.eth_dst.begin());
  std::copy(b.begin() + 8, b.begin() + 14, m.eth_src.begin());
  m.ethertype = get_u16(&b[14]);
  m.vlan_tci = get_u16(&b[16]);
  m.ip_src = get_u32(&b[18]);
  m.ip_dst = get_u32(&b[22]);
  m.ip_proto = b[26];
  m.ip_ttl = b[27];
  m.src_port = get_u16(&b[28]);
  m.dst_port = get_u16(&b[30]);
  m.l4_len = get_u16(&b[32]);
  if (b[36] & kFlagPayloadSum) m.payload_sum16 = get_u16(&b[34]);
  m.tcp_seq = get_u32(&b[37]);
  m.tcp_ack = get_u32(&b[41]);
  m.tcp_flags = b[45];
  m.tcp_window = get_u16(&b[46]);
  m.aux_a = get_u32(&b[48]);
  m.aux_b = get_u32(&b[52]);
  m.aux_c = get_u32(&b[56]);
  return R::success(m);
}

uint64_t flow_hash(const PacketMeta& m, uint64_t seed) {
  // splitmix64 over the canonical 4-tuple; full avalanche per word.
  uint64_t x = seed;
  auto mix = [&x](uint64_t v) {
    x += 0x9E3779B97F4A7C15ull + v;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    x = z ^ (z >> 31);
  };
  mix(uint64_t(m.ip_src) << 32 | m.ip_dst);
  mix(uint64_t(m.src_port) << 32 | uint64_t(m.dst_port) << 16 | m.ip_proto);
  return x;
}

}  // namespace meshstack::proto
