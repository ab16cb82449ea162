#include "meshstack/proto/udp.hpp"

#include "meshstack/proto/checksum.hpp"
#include "meshstack/proto/ipv4.hpp"

namespace meshstack::proto {

Result<UdpParsed> udp_parse(uint32_t src_ip, uint32_t dst_ip, ByteView bytes) {
  using R = Result<UdpParsed>;
  if (bytes.size() < 8) return R::failure("datagram shorter than UDP header");
  uint16_t len = get_u16(bytes.data() + 4);
  if (len < 8 || len > bytes.size())
    return R::failure("UDP length field inconsistent with datagram size");
  UdpParsed out;
  out.dgram.src_port = get_u16(bytes.data());
  out.dgram.dst_port = get_u16(bytes.data() + 2);
  ByteView payload = bytes.subspan(8, len - 8);
  out.payload_sum16 = ones_sum16(payload);
  uint16_t wire_sum = get_u16(bytes.data() + 6);
  out.checksum_present = wire_sum != 0;
  if (out.checksum_present) {
    // Sum over pseudo-header + header + payload, checksum field included,
    // must fold to 0xFFFF.
    ChecksumAccum a;
    a.add_u32(src_ip);
    a.add_u32(dst_ip);
    a.add_u16(kProtoUdp);
    a.add_u16(len);
    a.add(bytes.subspan(0, len));
    if (a.sum16() != 0xFFFF) return R::failure("UDP checksum mismatch");
  }
  out.dgram.payload.assign(payload.begin(), payload.end());
  return R::success(std::move(out));
}

uint16_t udp_checksum_from_sum(uint32_t src_ip, uint32_t dst_ip,
                               uint16_t src_port, uint16_t dst_port,
                               uint16_t payload_len, uint16_t payload_sum16) {
  uint16_t len = uint16_t(8 + payload_len);
  ChecksumAccum a;
  a.add_u32(src_ip);
  a.add_u32(dst_ip);
  a.add_u16(kProtoUdp);
  a.add_u16(len);
  a.add_u16(src_port);
  a.add_u16(dst_port);
  a.add_u16(len);  // the length field inside the header
  a.add_u16(payload_sum16);
  uint16_t sum = a.finish();
  return sum == 0 ? 0xFFFF : sum;
}

std::vector<uint8_t> udp_build_with_sum(uint32_t src_ip, uint32_t dst_ip,
                                        const UdpDatagram& d,
                                        uint16_t payload_sum16) {
  std::vector<uint8_t> out(8 + d.payload.size());
  put_u16(out.data(), d.src_port);
  put_u16(out.data() + 2, d.dst_port);
  put_u16(out.data() + 4, uint16_t(out.size()));
  put_u16(out.data() + 6,
          udp_checksum_from_sum(src_ip, dst_ip, d.src_port, d.dst_port,
                                uint16_t(d.payload.size()), payload_sum16));
  std::copy(d.payload.begin(), d.payload.end(), out.begin() + 8);
  return out;
}

std::vector<uint8_t> udp_build(uint32_t src_ip, uint32_t dst_ip,
                               const UdpDatagram& d) {
  return udp_build_with_sum(src_ip, dst_ip, d, ones_sum16(d.payload));
}

}  // namespace meshstack::proto
