#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::proto {

inline constexpr uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr uint16_t kEthertypeArp = 0x0806;
inline constexpr uint16_t kEthertypeVlan = 0x8100;

using MacAddr = std::array<uint8_t, 6>;

std::string mac_to_string(const MacAddr& m);
Result<MacAddr> mac_from_string(const std::string& s);

// An Ethernet II frame without FCS (the wire model strips it, as a NIC
// would). One optional 802.1Q tag is understood; the ethertype field always
// holds the inner type.
struct EthFrame {
  MacAddr dst{};
  MacAddr src{};
  std::optional<uint16_t> vlan_tci;
  uint16_t ethertype = 0;
  std::vector<uint8_t> payload;
};

Result<EthFrame> eth_parse(ByteView bytes);
std::vector<uint8_t> eth_build(const EthFrame& f);

// Header length for the frame as built (14, or 18 with a VLAN tag).
size_t eth_header_len(const EthFrame& f);

}  // namespace meshstack::proto
