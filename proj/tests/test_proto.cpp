#include <map>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "meshstack/proto/checksum.hpp"
#include "meshstack/proto/eth.hpp"
#include "meshstack/proto/ipv4.hpp"
#include "meshstack/proto/meta.hpp"
#include "meshstack/proto/route_table.hpp"
#include "meshstack/proto/tcp.hpp"
#include "meshstack/proto/udp.hpp"

using namespace meshstack;
using namespace meshstack::proto;

namespace {

// Reference one's-complement checksum, written the slow way (immediate
// end-around carry per word) to be structurally independent of the library.
uint16_t ref_checksum(std::vector<uint8_t> d) {
  if (d.size() % 2) d.push_back(0);
  uint32_t sum = 0;
  for (size_t i = 0; i < d.size(); i += 2) {
    sum += uint32_t(d[i]) * 256u + d[i + 1];
    if (sum > 0xFFFF) sum = (sum & 0xFFFF) + 1;
  }
  return uint16_t(~sum & 0xFFFF);
}

std::vector<uint8_t> random_bytes(std::mt19937_64& rng, size_t n) {
  std::vector<uint8_t> v(n);
  for (auto& b : v) b = uint8_t(rng());
  return v;
}

}  // namespace

TEST_CASE("checksum matches frozen vectors") {
  // Worked accumulation example: 0x0001 f203 f4f5 f6f7 sums to 0xddf2.
  std::vector<uint8_t> words{0x00, 0x01, 0xf2, 0x03, 0xf4, 0xf5, 0xf6, 0xf7};
  CHECK(ones_sum16(words) == 0xddf2);
  CHECK(internet_checksum(words) == uint16_t(~0xddf2 & 0xFFFF));

  // IPv4 header whose checksum field is 0xb861.
  std::vector<uint8_t> hdr{0x45, 0x00, 0x00, 0x73, 0x00, 0x00, 0x40,
                           0x00, 0x40, 0x11, 0x00, 0x00, 0xc0, 0xa8,
                           0x00, 0x01, 0xc0, 0xa8, 0x00, 0xc7};
  CHECK(internet_checksum(hdr) == 0xb861);
  // With the checksum in place, the header sums to zero.
  hdr[10] = 0xb8;
  hdr[11] = 0x61;
  CHECK(internet_checksum(hdr) == 0);
}

TEST_CASE("checksum agrees with reference on random buffers and chunkings") {
  std::mt19937_64 rng(0x1071);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = size_t(rng() % 257);
    auto data = random_bytes(rng, n);
    CHECK(internet_checksum(data) == ref_checksum(data));

    // Feeding the same bytes through arbitrary (including odd) chunk
    // boundaries must not change the sum.
    ChecksumAccum a;
    size_t i = 0;
    while (i < data.size()) {
      size_t take = std::min<size_t>(1 + rng() % 7, data.size() - i);
      a.add({data.data() + i, take});
      i += take;
    }
    CHECK(a.finish() == ref_checksum(data));
  }
}

TEST_CASE("ethernet frames round trip with and without VLAN tags") {
  auto mac1 = mac_from_string("02:00:00:aa:bb:cc");
  auto mac2 = mac_from_string("02:00:00:11:22:33");
  REQUIRE(mac1.ok());
  REQUIRE(mac2.ok());
  CHECK(mac_to_string(*mac1) == "02:00:00:aa:bb:cc");
  CHECK_FALSE(mac_from_string("02:00:00").ok());
  CHECK_FALSE(mac_from_string("02:00:00:aa:bb:1cc").ok());

  EthFrame f;
  f.dst = *mac1;
  f.src = *mac2;
  f.ethertype = kEthertypeIpv4;
  f.payload = {1, 2, 3, 4, 5};

  SUBCASE("untagged") {
    auto bytes = eth_build(f);
    CHECK(bytes.size() == 19);
    auto r = eth_parse(bytes);
    REQUIRE(r.ok());
    CHECK(r->dst == f.dst);
    CHECK(r->src == f.src);
    CHECK(r->ethertype == kEthertypeIpv4);
    CHECK_FALSE(r->vlan_tci.has_value());
    CHECK(r->payload == f.payload);
  }

  SUBCASE("tagged") {
    f.vlan_tci = 0x0123;
    auto bytes = eth_build(f);
    CHECK(bytes.size() == 23);
    CHECK(get_u16(bytes.data() + 12) == kEthertypeVlan);
    auto r = eth_parse(bytes);
    REQUIRE(r.ok());
    REQUIRE(r->vlan_tci.has_value());
    CHECK(*r->vlan_tci == 0x0123);
    CHECK(r->ethertype == kEthertypeIpv4);
    CHECK(r->payload == f.payload);
  }

  SUBCASE("truncated") {
    auto bytes = eth_build(f);
    bytes.resize(10);
    CHECK_FALSE(eth_parse(bytes).ok());
    f.vlan_tci = 7;
    auto tagged = eth_build(f);
    tagged.resize(16);  // cut inside the tag
    CHECK_FALSE(eth_parse(tagged).ok());
  }
}

TEST_CASE("ipv4 packets round trip and reject damage") {
  Ipv4Packet p;
  p.ttl = 17;
  p.protocol = kProtoUdp;
  p.identification = 0xBEEF;
  p.src = ipv4_addr(10, 0, 0, 1);
  p.dst = ipv4_addr(10, 0, 0, 2);
  p.payload = {9, 8, 7, 6};

  auto bytes = ipv4_build(p);
  CHECK(bytes.size() == 24);
  auto r = ipv4_parse(bytes);
  REQUIRE(r.ok());
  CHECK(r->src == p.src);
  CHECK(r->dst == p.dst);
  CHECK(r->ttl == 17);
  CHECK(r->protocol == kProtoUdp);
  CHECK(r->identification == 0xBEEF);
  CHECK(r->payload == p.payload);

  SUBCASE("options are kept and padded") {
    p.options = {0x01, 0x01, 0x01};  // three NOPs, padded to 4
    auto with_opts = ipv4_build(p);
    CHECK(with_opts.size() == 28);
    auto ro = ipv4_parse(with_opts);
    REQUIRE(ro.ok());
    CHECK(ro->options.size() == 4);
    CHECK(ro->payload == p.payload);
  }

  SUBCASE("header corruption is caught") {
    auto dmg = bytes;
    dmg[8] ^= 0x40;  // flip ttl bit
    CHECK_FALSE(ipv4_parse(dmg).ok());
  }

  SUBCASE("fragments are rejected") {
    auto frag = bytes;
    frag[6] = 0x20;  // MF
    put_u16(frag.data() + 10, 0);
    put_u16(frag.data() + 10, internet_checksum({frag.data(), 20}));
    CHECK_FALSE(ipv4_parse(frag).ok());
  }

  SUBCASE("wrong version is rejected") {
    auto v6 = bytes;
    v6[0] = 0x65;
    CHECK_FALSE(ipv4_parse(v6).ok());
  }

  SUBCASE("short buffer is rejected") {
    auto cut = bytes;
    cut.resize(12);
    CHECK_FALSE(ipv4_parse(cut).ok());
  }

  SUBCASE("address strings") {
    CHECK(ipv4_to_string(ipv4_addr(192, 168, 0, 199)) == "192.168.0.199");
    auto a = ipv4_from_string("10.1.2.3");
    REQUIRE(a.ok());
    CHECK(*a == ipv4_addr(10, 1, 2, 3));
    CHECK_FALSE(ipv4_from_string("10.1.2").ok());
    CHECK_FALSE(ipv4_from_string("10.1.2.999").ok());
  }
}

TEST_CASE("udp datagrams verify checksums and expose the payload sum") {
  uint32_t src_ip = ipv4_addr(10, 0, 0, 1);
  uint32_t dst_ip = ipv4_addr(10, 0, 0, 2);
  UdpDatagram d;
  d.src_port = 9000;
  d.dst_port = 7000;
  d.payload = {'h', 'e', 'l', 'l', 'o'};

  auto bytes = udp_build(src_ip, dst_ip, d);
  CHECK(bytes.size() == 13);
  auto r = udp_parse(src_ip, dst_ip, bytes);
  REQUIRE(r.ok());
  CHECK(r->dgram.src_port == 9000);
  CHECK(r->dgram.dst_port == 7000);
  CHECK(r->dgram.payload == d.payload);
  CHECK(r->checksum_present);
  CHECK(r->payload_sum16 == ones_sum16(d.payload));

  SUBCASE("precomputed-sum build is byte identical") {
    auto via_sum =
        udp_build_with_sum(src_ip, dst_ip, d, ones_sum16(d.payload));
    CHECK(via_sum == bytes);
  }

  SUBCASE("payload corruption is caught") {
    auto dmg = bytes;
    dmg[9] ^= 1;
    CHECK_FALSE(udp_parse(src_ip, dst_ip, dmg).ok());
  }

  SUBCASE("wrong pseudo-header is caught") {
    CHECK_FALSE(udp_parse(src_ip, dst_ip + 1, bytes).ok());
  }

  SUBCASE("zero checksum means unchecked and is accepted") {
    auto nocsum = bytes;
    put_u16(nocsum.data() + 6, 0);
    nocsum[9] ^= 1;  // damage would be invisible
    auto rn = udp_parse(src_ip, dst_ip, nocsum);
    REQUIRE(rn.ok());
    CHECK_FALSE(rn->checksum_present);
  }

  SUBCASE("computed zero is transmitted as all-ones") {
    // Search a 2-byte payload making the sum come out to zero.
    bool found = false;
    for (int hi = 0; hi < 256 && !found; ++hi) {
      for (int lo = 0; lo < 256 && !found; ++lo) {
        UdpDatagram probe = d;
        probe.payload = {uint8_t(hi), uint8_t(lo)};
        auto built = udp_build(src_ip, dst_ip, probe);
        if (get_u16(built.data() + 6) == 0xFFFF) {
          found = true;
          CHECK(udp_parse(src_ip, dst_ip, built).ok());
        }
        CHECK(get_u16(built.data() + 6) != 0);  // 0 is never transmitted
      }
    }
    CHECK(found);
  }
}

TEST_CASE("tcp segments round trip and verify checksums") {
  uint32_t src_ip = ipv4_addr(172, 16, 0, 1);
  uint32_t dst_ip = ipv4_addr(172, 16, 0, 9);
  TcpSegment s;
  s.src_port = 45000;
  s.dst_port = 8080;
  s.seq = 0xDEADBEEF;
  s.ack = 0x01020304;
  s.flags = kTcpAck | kTcpPsh;
  s.window = 65535;
  s.options = {0x02, 0x04, 0x05, 0xB4};  // MSS 1460
  s.payload = {'d', 'a', 't', 'a'};

  auto bytes = tcp_build(src_ip, dst_ip, s);
  CHECK(bytes.size() == 28);
  auto r = tcp_parse(src_ip, dst_ip, bytes);
  REQUIRE(r.ok());
  CHECK(r->src_port == 45000);
  CHECK(r->dst_port == 8080);
  CHECK(r->seq == 0xDEADBEEF);
  CHECK(r->ack == 0x01020304);
  CHECK(r->flags == (kTcpAck | kTcpPsh));
  CHECK(r->window == 65535);
  CHECK(r->options == s.options);
  CHECK(r->payload == s.payload);

  auto dmg = bytes;
  dmg[24] ^= 0x80;
  CHECK_FALSE(tcp_parse(src_ip, dst_ip, dmg).ok());
  CHECK_FALSE(tcp_parse(src_ip + 1, dst_ip, bytes).ok());

  CHECK(tcp_flags_to_string(kTcpSyn | kTcpAck) == "SYN|ACK");
  CHECK(tcp_flags_to_string(0) == "none");
}

TEST_CASE("metadata round trips through its 64-byte form") {
  std::mt19937_64 rng(0x4D455441);
  for (int trial = 0; trial < 100; ++trial) {
    PacketMeta m;
    m.layers = uint8_t(rng() & 0x1F);
    m.msg_type = MsgType(rng() % 15);
    for (auto& b : m.eth_dst) b = uint8_t(rng());
    for (auto& b : m.eth_src) b = uint8_t(rng());
    m.ethertype = uint16_t(rng());
    m.vlan_tci = uint16_t(rng());
    m.ip_src = uint32_t(rng());
    m.ip_dst = uint32_t(rng());
    m.ip_proto = uint8_t(rng());
    m.ip_ttl = uint8_t(rng());
    m.src_port = uint16_t(rng());
    m.dst_port = uint16_t(rng());
    m.l4_len = uint16_t(rng());
    if (rng() & 1) m.payload_sum16 = uint16_t(rng());
    m.tcp_seq = uint32_t(rng());
    m.tcp_ack = uint32_t(rng());
    m.tcp_flags = uint8_t(rng());
    m.tcp_window = uint16_t(rng());
    m.aux_a = uint32_t(rng());
    m.aux_b = uint32_t(rng());
    m.aux_c = uint32_t(rng());

    auto flit = m.serialize();
    auto r = PacketMeta::parse(flit);
    REQUIRE(r.ok());
    CHECK(r->layers == m.layers);
    CHECK(r->msg_type == m.msg_type);
    CHECK(r->eth_dst == m.eth_dst);
    CHECK(r->eth_src == m.eth_src);
    CHECK(r->ethertype == m.ethertype);
    CHECK(r->vlan_tci == m.vlan_tci);
    CHECK(r->ip_src == m.ip_src);
    CHECK(r->ip_dst == m.ip_dst);
    CHECK(r->ip_proto == m.ip_proto);
    CHECK(r->ip_ttl == m.ip_ttl);
    CHECK(r->src_port == m.src_port);
    CHECK(r->dst_port == m.dst_port);
    CHECK(r->l4_len == m.l4_len);
    CHECK(r->payload_sum16 == m.payload_sum16);
    CHECK(r->tcp_seq == m.tcp_seq);
    CHECK(r->tcp_ack == m.tcp_ack);
    CHECK(r->tcp_flags == m.tcp_flags);
    CHECK(r->tcp_window == m.tcp_window);
    CHECK(r->aux_a == m.aux_a);
    CHECK(r->aux_b == m.aux_b);
    CHECK(r->aux_c == m.aux_c);
  }
  CHECK_FALSE(PacketMeta::parse(std::vector<uint8_t>(63)).ok());
}

TEST_CASE("flow hash is deterministic, seed-sensitive and spreads flows") {
  PacketMeta m;
  m.ip_src = ipv4_addr(10, 0, 0, 1);
  m.ip_dst = ipv4_addr(10, 0, 0, 2);
  m.src_port = 1234;
  m.dst_port = 80;
  m.ip_proto = kProtoTcp;
  CHECK(flow_hash(m, 1) == flow_hash(m, 1));
  CHECK(flow_hash(m, 1) != flow_hash(m, 2));

  PacketMeta m2 = m;
  m2.src_port = 1235;
  CHECK(flow_hash(m2, 1) != flow_hash(m, 1));

  // 4-way bucket balance over 4000 random flows: each bucket within 15%.
  std::mt19937_64 rng(77);
  std::map<uint64_t, int> buckets;
  for (int i = 0; i < 4000; ++i) {
    PacketMeta f;
    f.ip_src = uint32_t(rng());
    f.ip_dst = uint32_t(rng());
    f.src_port = uint16_t(rng());
    f.dst_port = uint16_t(rng());
    f.ip_proto = kProtoUdp;
    buckets[flow_hash(f, 42) % 4]++;
  }
  for (auto& [b, count] : buckets) {
    CHECK(count > 850);
    CHECK(count < 1150);
  }
}

TEST_CASE("next-hop tables match in order and honor policies") {
  auto resolve = [](const std::string& name) -> std::optional<noc::Coord> {
    if (name == "a") return noc::Coord{1, 0};
    if (name == "b") return noc::Coord{2, 0};
    if (name == "c") return noc::Coord{3, 0};
    return std::nullopt;
  };

  std::vector<topo::RouteEntry> entries = {
      {"dst_port:7000", {"a"}, "single"},
      {"protocol:17", {"b", "c"}, "round_robin"},
      {"default", {"c"}, "single"},
  };
  auto t = NextHopTable::compile(entries, resolve, 99);
  REQUIRE(t.ok());

  PacketMeta udp7000;
  udp7000.layers = kLayerEth | kLayerIp | kLayerUdp;
  udp7000.ip_proto = 17;
  udp7000.dst_port = 7000;
  auto h = t->select(udp7000);
  REQUIRE(h.has_value());
  CHECK(h->tile == "a");  // first match wins even though rule 2 also matches

  PacketMeta udp9;
  udp9.layers = kLayerEth | kLayerIp | kLayerUdp;
  udp9.ip_proto = 17;
  udp9.dst_port = 9;
  auto h1 = t->select(udp9);
  auto h2 = t->select(udp9);
  auto h3 = t->select(udp9);
  REQUIRE(h1.has_value());
  REQUIRE(h2.has_value());
  REQUIRE(h3.has_value());
  CHECK(h1->tile == "b");  // round robin cycles b, c, b, ...
  CHECK(h2->tile == "c");
  CHECK(h3->tile == "b");

  PacketMeta arp;
  arp.layers = kLayerEth;
  arp.ethertype = kEthertypeArp;
  auto hd = t->select(arp);
  REQUIRE(hd.has_value());
  CHECK(hd->tile == "c");  // default

  SUBCASE("miss drops when there is no default") {
    std::vector<topo::RouteEntry> strict = {
        {"ethertype:0x0800", {"a"}, "single"}};
    auto ts = NextHopTable::compile(strict, resolve);
    REQUIRE(ts.ok());
    PacketMeta other;
    other.layers = kLayerEth;
    other.ethertype = kEthertypeArp;
    CHECK_FALSE(ts->select(other).has_value());
    // Layer gating: an ethertype rule never fires on a message without an
    // ethernet layer, even if the field value happens to match.
    PacketMeta bare;
    bare.ethertype = 0x0800;
    CHECK_FALSE(ts->select(bare).has_value());
  }

  SUBCASE("flow hash sticks per flow and uses every destination") {
    std::vector<topo::RouteEntry> lb = {
        {"default", {"a", "b", "c"}, "flow_hash"}};
    auto tl = NextHopTable::compile(lb, resolve, 1234);
    REQUIRE(tl.ok());
    std::mt19937_64 rng(5);
    std::set<std::string> used;
    for (int i = 0; i < 200; ++i) {
      PacketMeta f;
      f.ip_src = uint32_t(rng());
      f.ip_dst = uint32_t(rng());
      f.src_port = uint16_t(rng());
      f.dst_port = uint16_t(rng());
      auto first = tl->select(f);
      REQUIRE(first.has_value());
      for (int j = 0; j < 3; ++j) {
        auto again = tl->select(f);
        REQUIRE(again.has_value());
        CHECK(again->tile == first->tile);
      }
      used.insert(first->tile);
    }
    CHECK(used.size() == 3);
  }

  SUBCASE("compile rejects malformed entries") {
    CHECK_FALSE(
        NextHopTable::compile({{"bogus", {"a"}, "single"}}, resolve).ok());
    CHECK_FALSE(
        NextHopTable::compile({{"color:blue", {"a"}, "single"}}, resolve).ok());
    CHECK_FALSE(NextHopTable::compile({{"dst_port:many", {"a"}, "single"}},
                                      resolve)
                    .ok());
    CHECK_FALSE(NextHopTable::compile({{"default", {"zz"}, "single"}}, resolve)
                    .ok());
    CHECK_FALSE(
        NextHopTable::compile({{"default", {"a", "b"}, "single"}}, resolve)
            .ok());
    CHECK_FALSE(
        NextHopTable::compile({{"default", {"a"}, "sometimes"}}, resolve).ok());
    CHECK_FALSE(NextHopTable::compile({{"default", {}, "single"}}, resolve).ok());
  }
}

TEST_CASE("a full frame composes and parses through every layer") {
  // Build app -> udp -> ip -> eth, then strip layer by layer as the rx
  // pipeline would, deepening the metadata at each step.
  uint32_t src_ip = ipv4_addr(192, 168, 1, 10);
  uint32_t dst_ip = ipv4_addr(192, 168, 1, 20);
  std::vector<uint8_t> app(300);
  std::mt19937_64 rng(3);
  for (auto& b : app) b = uint8_t(rng());

  UdpDatagram d{9999, 7000, app};
  Ipv4Packet ip;
  ip.protocol = kProtoUdp;
  ip.src = src_ip;
  ip.dst = dst_ip;
  ip.payload = udp_build(src_ip, dst_ip, d);
  EthFrame f;
  f.dst = *mac_from_string("02:00:00:00:00:02");
  f.src = *mac_from_string("02:00:00:00:00:01");
  f.ethertype = kEthertypeIpv4;
  f.payload = ipv4_build(ip);
  auto wire = eth_build(f);
  CHECK(wire.size() == 14 + 20 + 8 + 300);

  PacketMeta meta;
  auto ef = eth_parse(wire);
  REQUIRE(ef.ok());
  meta.layers |= kLayerEth;
  meta.eth_dst = ef->dst;
  meta.eth_src = ef->src;
  meta.ethertype = ef->ethertype;

  auto ipp = ipv4_parse(ef->payload);
  REQUIRE(ipp.ok());
  meta.layers |= kLayerIp;
  meta.ip_src = ipp->src;
  meta.ip_dst = ipp->dst;
  meta.ip_proto = ipp->protocol;
  meta.ip_ttl = ipp->ttl;

  auto up = udp_parse(ipp->src, ipp->dst, ipp->payload);
  REQUIRE(up.ok());
  meta.layers |= kLayerUdp;
  meta.src_port = up->dgram.src_port;
  meta.dst_port = up->dgram.dst_port;
  meta.l4_len = uint16_t(up->dgram.payload.size());
  meta.payload_sum16 = up->payload_sum16;

  CHECK(up->dgram.payload == app);
  CHECK(meta.dst_port == 7000);

  // The echo return path rebuilds the same bytes from parsed pieces, with
  // src/dst swapped; building with the carried payload sum matches a
  // payload-walking build bit for bit.
  UdpDatagram reply{meta.dst_port, meta.src_port, up->dgram.payload};
  auto walk = udp_build(dst_ip, src_ip, reply);
  auto carried = udp_build_with_sum(dst_ip, src_ip, reply, *meta.payload_sum16);
  CHECK(walk == carried);

  // Round trip the metadata through its flit form before routing on it.
  auto parsed = PacketMeta::parse(meta.serialize());
  REQUIRE(parsed.ok());
  CHECK(parsed->dst_port == 7000);
  CHECK(parsed->payload_sum16 == meta.payload_sum16);
}
