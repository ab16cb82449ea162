#include "meshstack/proto/tcp.hpp"

#include "meshstack/proto/checksum.hpp"
#include "meshstack/proto/ipv4.hpp"

namespace meshstack::proto {

std::string tcp_flags_to_string(uint8_t flags) {
  std::string s;
  auto tag = [&](uint8_t bit, const char* name) {
    if (!(flags & bit)) return;
    if (!s.empty()) s += '|';
    s += name;
  };
  tag(kTcpSyn, "SYN");
  tag(kTcpAck, "ACK");
  tag(kTcpFin, "FIN");
  tag(kTcpRst, "RST");
  tag(kTcpPsh, "PSH");
  if (s.empty()) s = "none";
  return s;
}

Result<TcpSegment> tcp_parse(uint32_t src_ip, uint32_t dst_ip, ByteView bytes) {
  using R = Result<TcpSegment>;
  if (bytes.size() < 20) return R::failure("segment shorter than TCP header");
  size_t doff = size_t(bytes[12] >> 4) * 4;
  if (doff < 20) return R::failure("TCP data offset below minimum");
  if (bytes.size() < doff) return R::failure("segment shorter than its data offset");
  if (l4_checksum(src_ip, dst_ip, kProtoTcp, bytes) != 0)
    return R::failure("TCP checksum mismatch");

  TcpSegment s;
  s.src_port = get_u16(bytes.data());
  s.dst_port = get_u16(bytes.data() + 2);
  s.seq = get_u32(bytes.data() + 4);
  s.ack = get_u32(bytes.data() + 8);
  s.flags = bytes[13];
  s.window = get_u16(bytes.data() + 14);
  s.urgent = get_u16(bytes.data() + 18);
  s.options.assign(bytes.begin() + 20, bytes.begin() + std::ptrdiff_t(doff));
  s.payload.assign(bytes.begin() + std::ptrdiff_t(doff), bytes.end());
  return R::success(std::move(s));
}

std::vector<uint8_t> tcp_build(uint32_t src_ip, uint32_t dst_ip,
                               const TcpSegment& s) {
  size_t doff = 20 + (s.options.size() + 3) / 4 * 4;
  std::vector<uint8_t> out(doff + s.payload.size(), 0);
  put_u16(out.data(), s.src_port);
  put_u16(out.data() + 2, s.dst_port);
  put_u32(out.data() + 4, s.seq);
  put_u32(out.data() + 8, s.ack);
  out[12] = uint8_t(doff / 4 << 4);
  out[13] = s.flags;
  put_u16(out.data() + 14, s.window);
  put_u16(out.data() + 18, s.urgent);
  std::copy(s.options.begin(), s.options.end(), out.begin() + 20);
  std::copy(s.payload.begin(), s.payload.end(),
            out.begin() + std::ptrdiff_t(doff));
  put_u16(out.data() + 16, l4_checksum(src_ip, dst_ip, kProtoTcp, out));
  return out;
}

}  // namespace meshstack::proto
