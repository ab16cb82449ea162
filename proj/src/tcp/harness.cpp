#include "meshstack/tcp/harness.hpp"

#include <algorithm>
#include <deque>

#include "meshstack/proto/ipv4.hpp"

namespace meshstack::tcp {

void LossyChannel::push(proto::TcpSegment seg, uint64_t cycle) {
  ++pushed;
  if (!seg.payload.empty()) {
    ++data_seen_;
    if (plan_.drop_nth_data != 0 && data_seen_ == plan_.drop_nth_data) {
      ++forced_drops;
      return;
    }
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (plan_.drop_p > 0 && u(rng_) < plan_.drop_p) {
    ++dropped;
    return;
  }
  uint64_t delay = plan_.base_delay;
  if (plan_.reorder_p > 0 && u(rng_) < plan_.reorder_p) {
    delay += plan_.reorder_delay;
    ++reordered;
  }
  if (plan_.dup_p > 0 && u(rng_) < plan_.dup_p) {
    ++duplicated;
    q_.emplace(cycle + delay + 1, seg);
  }
  q_.emplace(cycle + delay, std::move(seg));
}

std::vector<proto::TcpSegment> LossyChannel::deliver(uint64_t cycle) {
  std::vector<proto::TcpSegment> out;
  auto end = q_.upper_bound(cycle);
  for (auto it = q_.begin(); it != end; ++it) out.push_back(std::move(it->second));
  q_.erase(q_.begin(), end);
  return out;
}

StreamRunResult run_stream_pair(const StreamRunConfig& cfg) {
  StreamRunResult res;

  TcpStack::Config scfg = cfg.server;
  if (scfg.local_ip == 0) scfg.local_ip = 0x0A000002;
  if (scfg.listen_ports.empty()) scfg.listen_ports = {9000};
  scfg.seed = cfg.seed;
  TcpStack server(scfg);

  TcpPeerModel::Config pcfg = cfg.client;
  pcfg.remote_ip = scfg.local_ip;
  pcfg.remote_port = scfg.listen_ports.front();
  TcpPeerModel client(pcfg);

  LossyChannel to_server(cfg.to_server, cfg.seed * 2 + 1);
  LossyChannel to_client(cfg.to_client, cfg.seed * 2 + 2);

  std::mt19937_64 payload_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<uint8_t> up(cfg.bytes_to_server);
  for (auto& b : up) b = uint8_t(payload_rng());
  std::vector<uint8_t> down(cfg.bytes_to_client);
  for (auto& b : down) b = uint8_t(payload_rng());
  client.send_stream(up);

  FlowKey key{pcfg.local_ip, pcfg.local_port, pcfg.remote_port};
  std::vector<uint8_t> server_received;
  size_t down_fed = 0;        // bytes handed to app_tx_commit so far
  size_t rx_outstanding = 0;  // rx request currently pending with the stack
  size_t tx_wanted = 0;       // tx reservation currently pending
  uint32_t last_ack_seen = 0;
  bool ack_seen = false;

  // The server application: consumes stack actions, answering notifications
  // with the matching follow-up calls. Follow-ups produce more actions, so
  // this runs as a work queue rather than recursion.
  std::deque<TcpAction> work;
  std::vector<TcpAction> scratch;
  auto absorb = [&](uint64_t cycle) {
    for (auto& a : scratch) work.push_back(std::move(a));
    scratch.clear();
    while (!work.empty()) {
      TcpAction a = std::move(work.front());
      work.pop_front();
      if (a.kind == TcpAction::Kind::Segment) {
        if (a.seg.flags & proto::kTcpAck) {
          if (ack_seen && seq_diff(a.seg.ack, last_ack_seen) < 0)
            res.acks_monotone = false;
          last_ack_seen = a.seg.ack;
          ack_seen = true;
        }
        to_client.push(std::move(a.seg), cycle);
        continue;
      }
      const auto& n = a.note;
      switch (n.kind) {
        case AppNotification::Kind::ConnEstablished:
          break;  // the main loop places requests once the flow shows up
        case AppNotification::Kind::RxReady: {
          auto chunk = server.rx_ring_peek(n.flow, n.len);
          server_received.insert(server_received.end(), chunk.begin(),
                                 chunk.end());
          rx_outstanding = 0;
          server.app_rx_done(n.flow, n.len, cycle, scratch);
          break;
        }
        case AppNotification::Kind::TxSpace: {
          size_t len = std::min(size_t(n.len), down.size() - down_fed);
          if (len > 0) {
            server.app_tx_commit(n.flow, ByteView(down.data() + down_fed, len),
                                 cycle);
            down_fed += len;
          }
          tx_wanted = 0;
          break;
        }
        case AppNotification::Kind::Reject:
          res.err = "server app call rejected";
          break;
      }
      for (auto& b : scratch) work.push_back(std::move(b));
      scratch.clear();
    }
  };

  std::vector<proto::TcpSegment> client_out;
  uint64_t cycle = 0;
  uint64_t quiet = 0;
  bool failed = false;
  for (; cycle < cfg.max_cycles; ++cycle) {
    bool moved = false;

    for (auto& seg : to_server.deliver(cycle)) {
      moved = true;
      server.rx_segment(pcfg.local_ip, scfg.local_ip, seg, cycle, scratch);
      absorb(cycle);
    }

    // Keep one receive request and one transmit reservation open at a time.
    if (const TcpStack::Flow* f = server.flow(key);
        f && (f->rx.state == ConnState::Established ||
              f->rx.state == ConnState::Closing)) {
      if (rx_outstanding == 0 && server_received.size() < cfg.bytes_to_server) {
        rx_outstanding =
            std::min(cfg.app_chunk, cfg.bytes_to_server - server_received.size());
        server.app_rx_request(key, rx_outstanding, cycle, scratch);
        absorb(cycle);
      }
      if (tx_wanted == 0 && down_fed < down.size()) {
        tx_wanted = std::min(cfg.app_chunk, down.size() - down_fed);
        server.app_tx_reserve(key, tx_wanted, cycle, scratch);
        absorb(cycle);
      }
    }

    server.tx_cycle(cycle, scratch);
    absorb(cycle);

    for (auto& seg : to_client.deliver(cycle)) {
      moved = true;
      client.on_segment(seg, cycle, client_out);
    }
    client.step(cycle, client_out);
    for (auto& seg : client_out) {
      moved = true;
      to_server.push(std::move(seg), cycle);
    }
    client_out.clear();

    bool up_done =
        server_received.size() >= cfg.bytes_to_server && client.stream_acked();
    bool down_done = client.received().size() >= cfg.bytes_to_client &&
                     down_fed >= down.size();
    bool drained = to_server.idle() && to_client.idle();
    if (up_done && down_done && drained && !moved)
      ++quiet;
    else
      quiet = 0;
    if (quiet > 2000) break;  // past the client timer; final ACKs have settled
    if (!res.err.empty()) {
      failed = true;
      break;
    }
  }

  res.cycles = cycle;
  res.to_server_exact = server_received == up;
  res.to_client_exact = client.received() == down;
  res.discipline_violations = server.discipline_violations();
  res.to_server_drops = to_server.dropped + to_server.forced_drops;
  res.to_client_drops = to_client.dropped + to_client.forced_drops;
  res.server_counters = server.counters();
  res.client_counters = client.counters();
  if (!failed && cycle >= cfg.max_cycles) {
    res.err = "run did not converge within max_cycles";
    failed = true;
  }
  if (!failed && !res.to_server_exact) {
    res.err = "client->server stream mismatch";
    failed = true;
  }
  if (!failed && !res.to_client_exact) {
    res.err = "server->client stream mismatch";
    failed = true;
  }
  if (!failed && !res.acks_monotone) {
    res.err = "server emitted a regressing ACK";
    failed = true;
  }
  if (!failed && res.discipline_violations != 0) {
    res.err = "rx/tx ownership discipline violated";
    failed = true;
  }
  res.ok = !failed;
  return res;
}

TcpWireClient::TcpWireClient(Config cfg, sim::WireModel* tx)
    : cfg_(cfg), peer_(cfg.peer), tx_(tx) {}

void TcpWireClient::on_wire_word(uint64_t cycle, const std::vector<uint8_t>& frame,
                                 size_t word_index, size_t word_count) {
  if (word_index + 1 != word_count) return;  // act on the completed frame
  auto eth = proto::eth_parse(frame);
  if (!eth.ok()) {
    ++parse_errors;
    return;
  }
  if (eth->ethertype != proto::kEthertypeIpv4) return;
  auto ip = proto::ipv4_parse(eth->payload);
  if (!ip.ok() || ip->protocol != proto::kProtoTcp) {
    ++parse_errors;
    return;
  }
  auto seg = tcp_parse(ip->src, ip->dst, ip->payload);
  if (!seg.ok()) {
    ++parse_errors;
    return;
  }
  std::vector<proto::TcpSegment> out;
  peer_.on_segment(*seg, cycle, out);
  send_segments(out);
}

void TcpWireClient::step(uint64_t cycle) {
  std::vector<proto::TcpSegment> out;
  peer_.step(cycle, out);
  send_segments(out);
}

void TcpWireClient::send_segments(std::vector<proto::TcpSegment>& segs) {
  for (auto& seg : segs) {
    proto::Ipv4Packet ip;
    ip.src = cfg_.peer.local_ip;
    ip.dst = cfg_.peer.remote_ip;
    ip.protocol = proto::kProtoTcp;
    ip.identification = next_ident_++;
    ip.payload = tcp_build(ip.src, ip.dst, seg);
    proto::EthFrame eth;
    eth.dst = cfg_.stack_mac;
    eth.src = cfg_.client_mac;
    eth.ethertype = proto::kEthertypeIpv4;
    eth.payload = proto::ipv4_build(ip);
    tx_->send(proto::eth_build(eth));
  }
  segs.clear();
}

}  // namespace meshstack::tcp
