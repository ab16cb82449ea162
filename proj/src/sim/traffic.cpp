#include "meshstack/sim/traffic.hpp"

#include <algorithm>
#include <memory>

#include "meshstack/proto/ipv4.hpp"
#include "meshstack/proto/udp.hpp"

namespace meshstack::sim {

EchoClient::EchoClient(Config cfg, WireModel* tx)
    : cfg_(std::move(cfg)), tx_(tx), rng_(cfg_.seed) {}

void EchoClient::send_one(uint64_t cycle) {
  size_t len = std::max<size_t>(cfg_.payload_len, 8);
  std::vector<uint8_t> payload(len);
  for (int i = 0; i < 8; ++i) payload[i] = uint8_t(next_seq_ >> (56 - 8 * i));
  for (size_t i = 8; i < len; ++i) payload[i] = uint8_t(rng_());

  proto::UdpDatagram d;
  d.src_port = cfg_.client_port;
  d.dst_port = cfg_.server_port;
  d.payload = payload;
  proto::Ipv4Packet ip;
  ip.protocol = proto::kProtoUdp;
  ip.src = cfg_.client_ip;
  ip.dst = cfg_.stack_ip;
  ip.identification = uint16_t(next_seq_);
  ip.payload = proto::udp_build(ip.src, ip.dst, d);
  proto::EthFrame f;
  f.dst = cfg_.stack_mac;
  f.src = cfg_.client_mac;
  f.ethertype = proto::kEthertypeIpv4;
  f.payload = proto::ipv4_build(ip);

  if (sent == 0) first_send_cycle = cycle;
  inflight_[next_seq_] = {cycle, std::move(payload)};
  ++next_seq_;
  ++sent;
  tx_->send(proto::eth_build(f));
}

void EchoClient::step(uint64_t cycle) {
  if (cycle < cfg_.start_cycle) return;
  bool more = cfg_.total == 0 || sent < cfg_.total;
  if (cfg_.interval) {
    if (more && (cycle - cfg_.start_cycle) % cfg_.interval == 0)
      send_one(cycle);
  } else {
    while ((cfg_.total == 0 || sent < cfg_.total) &&
           inflight_.size() < size_t(cfg_.window))
      send_one(cycle);
  }
}

void EchoClient::on_wire_word(uint64_t cycle,
                              const std::vector<uint8_t>& frame,
                              size_t word_index, size_t word_count) {
  if (word_index + 1 != word_count) return;  // frame still arriving
  auto f = proto::eth_parse(frame);
  if (!f.ok()) {
    ++parse_errors;
    return;
  }
  auto ip = proto::ipv4_parse(f->payload);
  if (!ip.ok() || ip->protocol != proto::kProtoUdp) {
    ++parse_errors;
    return;
  }
  auto u = proto::udp_parse(ip->src, ip->dst, ip->payload);
  if (!u.ok() || u->dgram.payload.size() < 8) {
    ++parse_errors;
    return;
  }
  const auto& pl = u->dgram.payload;
  uint64_t seq = 0;
  for (int i = 0; i < 8; ++i) seq = seq << 8 | pl[i];
  auto it = inflight_.find(seq);
  if (it == inflight_.end()) {
    ++payload_mismatches;
    return;
  }
  bool match = pl == it->second.second && f->src == cfg_.stack_mac &&
               f->dst == cfg_.client_mac && ip->src == cfg_.stack_ip &&
               ip->dst == cfg_.client_ip &&
               u->dgram.src_port == cfg_.server_port &&
               u->dgram.dst_port == cfg_.client_port;
  if (!match) {
    ++payload_mismatches;
    inflight_.erase(it);
    return;
  }
  ++received;
  bytes_echoed += pl.size();
  last_recv_cycle = cycle;
  latencies.push_back(cycle - it->second.first);
  inflight_.erase(it);
}

void UdpRequester::send(uint16_t dst_port, std::vector<uint8_t> payload) {
  proto::UdpDatagram d;
  d.src_port = cfg_.client_port;
  d.dst_port = dst_port;
  d.payload = std::move(payload);
  proto::Ipv4Packet ip;
  ip.protocol = proto::kProtoUdp;
  ip.src = cfg_.client_ip;
  ip.dst = cfg_.stack_ip;
  ip.identification = next_ip_id_++;
  ip.payload = proto::udp_build(ip.src, ip.dst, d);
  proto::EthFrame f;
  f.dst = cfg_.stack_mac;
  f.src = cfg_.client_mac;
  f.ethertype = proto::kEthertypeIpv4;
  f.payload = proto::ipv4_build(ip);
  ++sent;
  tx_->send(proto::eth_build(f));
}

void UdpRequester::on_wire_word(uint64_t cycle,
                                const std::vector<uint8_t>& frame,
                                size_t word_index, size_t word_count) {
  if (word_index + 1 != word_count) return;
  auto f = proto::eth_parse(frame);
  if (!f.ok() || f->dst != cfg_.client_mac) {
    ++parse_errors;
    return;
  }
  auto ip = proto::ipv4_parse(f->payload);
  if (!ip.ok() || ip->protocol != proto::kProtoUdp ||
      ip->dst != cfg_.client_ip) {
    ++parse_errors;
    return;
  }
  auto u = proto::udp_parse(ip->src, ip->dst, ip->payload);
  if (!u.ok() || u->dgram.dst_port != cfg_.client_port) {
    ++parse_errors;
    return;
  }
  replies.push_back({cycle, u->dgram.src_port, std::move(u->dgram.payload)});
}

WireModel::FaultFn make_random_faults(uint64_t seed, double drop_p,
                                      double corrupt_p) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, drop_p, corrupt_p](std::vector<uint8_t>& f) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(*rng) < drop_p) return false;
    if (!f.empty() && u(*rng) < corrupt_p) {
      size_t i = size_t((*rng)() % f.size());
      f[i] ^= uint8_t(1u << ((*rng)() % 8));
    }
    return true;
  };
}

}  // namespace meshstack::sim
