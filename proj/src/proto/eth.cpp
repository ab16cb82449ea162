#include "meshstack/proto/eth.hpp"

#include <cstdio>

namespace meshstack::proto {

std::string mac_to_string(const MacAddr& m) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", m[0], m[1],
                m[2], m[3], m[4], m[5]);
  return buf;
}

Result<MacAddr> mac_from_string(const std::string& s) {
  using R = Result<MacAddr>;
  MacAddr m{};
  unsigned v[6];
  char extra;
  if (std::sscanf(s.c_str(), "%x:%x:%x:%x:%x:%x%c", &v[0], &v[1], &v[2], &v[3],
                  &v[4], &v[5], &extra) != 6)
    return R::failure("malformed MAC address '" + s + "'");
  for (int i = 0; i < 6; ++i) {
    if (v[i] > 0xFF) return R::failure("MAC octet out of range in '" + s + "'");
    m[size_t(i)] = uint8_t(v[i]);
  }
  return R::success(m);
}

Result<EthFrame> eth_parse(ByteView bytes) {
  using R = Result<EthFrame>;
  if (bytes.size() < 14) return R::failure("frame shorter than Ethernet header");
  EthFrame f;
  std::copy(bytes.begin(), bytes.begin() + 6, f.dst.begin());
  std::copy(bytes.begin() + 6, bytes.begin() + 12, f.src.begin());
  size_t off = 12;
  uint16_t type = get_u16(bytes.data() + off);
  off += 2;
  if (type == kEthertypeVlan) {
    if (bytes.size() < 18) return R::failure("frame truncated inside VLAN tag");
    f.vlan_tci = get_u16(bytes.data() + off);
    type = get_u16(bytes.data() + off + 2);
    off += 4;
  }
  f.ethertype = type;
  f.payload.assign(bytes.begin() + std::ptrdiff_t(off), bytes.end());
  return R::success(std::move(f));
}

std::vector<uint8_t> eth_build(const EthFrame& f) {
  std::vector<uint8_t> out;
  out.reserve(eth_header_len(f) + f.payload.size());
  out.insert(out.end(), f.dst.begin(), f.dst.end());
  out.insert(out.end(), f.src.begin(), f.src.end());
  uint8_t tmp[4];
  if (f.vlan_tci) {
    put_u16(tmp, kEthertypeVlan);
    put_u16(tmp + 2, *f.vlan_tci);
    out.insert(out.end(), tmp, tmp + 4);
  }
  put_u16(tmp, f.ethertype);
  out.insert(out.end(), tmp, tmp + 2);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

size_t eth_header_len(const EthFrame& f) { return f.vlan_tci ? 18 : 14; }

}  // namespace meshstack::proto
