#include "meshstack/proto/ipv4.hpp"

#include <cstdio>

#include "meshstack/proto/checksum.hpp"

namespace meshstack::proto {

std::string ipv4_to_string(uint32_t addr) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", addr >> 24 & 0xFF,
                addr >> 16 & 0xFF, addr >> 8 & 0xFF, addr & 0xFF);
  return buf;
}

Result<uint32_t> ipv4_from_string(const std::string& s) {
  using R = Result<uint32_t>;
  unsigned a, b, c, d;
  char extra;
  if (std::sscanf(s.c_str(), "%u.%u.%u.%u%c", &a, &b, &c, &d, &extra) != 4 ||
      a > 255 || b > 255 || c > 255 || d > 255)
    return R::failure("malformed IPv4 address '" + s + "'");
  return R::success(ipv4_addr(uint8_t(a), uint8_t(b), uint8_t(c), uint8_t(d)));
}

size_t ipv4_header_len(const Ipv4Packet& p) {
  return 20 + (p.options.size() + 3) / 4 * 4;
}

Result<Ipv4Packet> ipv4_parse(ByteView bytes) {
  using R = Result<Ipv4Packet>;
  if (bytes.size() < 20) return R::failure("packet shorter than IPv4 header");
  uint8_t version = bytes[0] >> 4;
  if (version != 4) return R::failure("IP version is not 4");
  size_t ihl = size_t(bytes[0] & 0x0F) * 4;
  if (ihl < 20) return R::failure("IPv4 header length below minimum");
  if (bytes.size() < ihl) return R::failure("packet shorter than its IHL");
  uint16_t total_len = get_u16(bytes.data() + 2);
  if (total_len < ihl || total_len > bytes.size())
    return R::failure("IPv4 total length inconsistent with packet size");
  uint16_t frag = get_u16(bytes.data() + 6);
  if ((frag & 0x2000) || (frag & 0x1FFF))
    return R::failure("fragmented IPv4 packets are not supported");
  if (internet_checksum(bytes.subspan(0, ihl)) != 0)
    return R::failure("IPv4 header checksum mismatch");

  Ipv4Packet p;
  p.dscp_ecn = bytes[1];
  p.identification = get_u16(bytes.data() + 4);
  p.ttl = bytes[8];
  p.protocol = bytes[9];
  p.src = get_u32(bytes.data() + 12);
  p.dst = get_u32(bytes.data() + 16);
  p.options.assign(bytes.begin() + 20, bytes.begin() + std::ptrdiff_t(ihl));
  p.payload.assign(bytes.begin() + std::ptrdiff_t(ihl),
                   bytes.begin() + total_len);
  return R::success(std::move(p));
}

std::vector<uint8_t> ipv4_build(const Ipv4Packet& p) {
  size_t ihl = ipv4_header_len(p);
  std::vector<uint8_t> out(ihl + p.payload.size(), 0);
  out[0] = uint8_t(0x40 | ihl / 4);
  out[1] = p.dscp_ecn;
  put_u16(out.data() + 2, uint16_t(out.size()));
  put_u16(out.data() + 4, p.identification);
  put_u16(out.data() + 6, 0x4000);  // DF, no fragments
  out[8] = p.ttl;
  out[9] = p.protocol;
  put_u32(out.data() + 12, p.src);
  put_u32(out.data() + 16, p.dst);
  std::copy(p.options.begin(), p.options.end(), out.begin() + 20);
  put_u16(out.data() + 10, internet_checksum({out.data(), ihl}));
  std::copy(p.payload.begin(), p.payload.end(),
            out.begin() + std::ptrdiff_t(ihl));
  return out;
}

}  // namespace meshstack::proto
