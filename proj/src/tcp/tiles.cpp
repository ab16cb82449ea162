#include "meshstack/tcp/tiles.hpp"

#include <algorithm>

#include "meshstack/proto/ipv4.hpp"

namespace meshstack::tcp {

using proto::PacketMeta;
using sim::OutMessage;

namespace {

std::optional<PacketMeta> meta_of(const noc::NocMessage& in) {
  auto r = PacketMeta::parse(in.metadata);
  if (!r.ok()) return std::nullopt;
  return *r;
}

std::vector<uint16_t> parse_ports(const std::string& s) {
  std::vector<uint16_t> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    try {
      out.push_back(uint16_t(std::stoul(s.substr(pos, comma - pos), nullptr, 0)));
    } catch (...) {
    }
    pos = comma + 1;
  }
  return out;
}

FlowKey flow_of(const PacketMeta& m) {
  return FlowKey{m.ip_src, m.src_port, m.dst_port};
}

}  // namespace

TcpTileGroup::Entry& TcpTileGroup::entry_for(const sim::TileLogic& tile) {
  std::string key = tile.param_str("stack", "tcp");
  auto it = entries.find(key);
  if (it != entries.end()) return it->second;

  TcpStack::Config cfg;
  auto ip = proto::ipv4_from_string(tile.param_str("ip", "10.0.0.2"));
  cfg.local_ip = ip.ok() ? *ip : 0x0A000002;
  cfg.listen_ports = parse_ports(tile.param_str("ports", "9000"));
  if (cfg.listen_ports.empty()) cfg.listen_ports = {9000};
  cfg.mss = size_t(tile.param_int("mss", 1460));
  cfg.ring_capacity = size_t(tile.param_int("ring", 64 * 1024));
  cfg.rto = uint64_t(tile.param_int("rto", 5000));
  cfg.segs_per_cycle = tile.param_int("budget", 1);
  cfg.dupack_threshold = tile.param_int("dupack", 3);
  if (const std::string* iss = tile.param("iss")) {
    try {
      cfg.forced_iss = uint32_t(std::stoull(*iss, nullptr, 0));
    } catch (...) {
    }
  }
  // Both halves must derive the same ISN regardless of which tile built the
  // stack, so the seed comes from the registry key, not the tile name.
  cfg.seed = std::hash<std::string>{}(key);

  Entry e;
  e.stack = std::make_shared<TcpStack>(cfg);
  return entries.emplace(key, std::move(e)).first->second;
}

namespace {

// Turns the engine's emissions into mesh messages: segments go down the
// stack to `next`, notifications route by dst_port through the tile table,
// and newly received in-order bytes mirror to the rx_buf tile if one is set.
struct ActionSink {
  using RouteFn = std::function<std::optional<proto::NextHop>(const PacketMeta&)>;

  sim::TileLogic& tile;
  TcpTileGroup::Entry& entry;
  std::optional<noc::Coord> next;
  std::optional<noc::Coord> rx_buf;
  RouteFn route;
  std::vector<OutMessage>& out;

  void segments_and_notes(std::vector<TcpAction>& acts) {
    for (auto& a : acts) {
      if (a.kind == TcpAction::Kind::Segment)
        segment(a);
      else
        note(a.note);
    }
    acts.clear();
  }

  void segment(const TcpAction& a) {
    if (!next) {
      tile.count("no_next_drop");
      return;
    }
    PacketMeta m;
    m.msg_type = proto::MsgType::Data;
    m.layers = proto::kLayerIp | proto::kLayerTcp;
    auto eth = entry.eth.find(a.dst_ip);
    if (eth != entry.eth.end()) {
      m.layers |= proto::kLayerEth;
      m.eth_dst = eth->second.first;
      m.eth_src = eth->second.second;
      m.ethertype = proto::kEthertypeIpv4;
    }
    m.ip_src = a.src_ip;
    m.ip_dst = a.dst_ip;
    m.ip_proto = proto::kProtoTcp;
    m.ip_ttl = 64;
    m.src_port = a.seg.src_port;
    m.dst_port = a.seg.dst_port;
    m.l4_len = uint16_t(a.seg.payload.size());
    m.tcp_seq = a.seg.seq;
    m.tcp_ack = a.seg.ack;
    m.tcp_flags = a.seg.flags;
    m.tcp_window = a.seg.window;
    OutMessage o;
    o.msg = sim::data_message(*next, m, tcp_build(a.src_ip, a.dst_ip, a.seg));
    // The TCP checksum covers the payload, so the segment is only ready
    // once the bytes that produced it have fully arrived.
    o.after_tail = true;
    tile.count("segments_out");
    out.push_back(std::move(o));
  }

  void note(const AppNotification& n) {
    PacketMeta m;
    m.msg_type = proto::MsgType::AppNotify;
    m.ip_src = n.flow.peer_ip;
    m.src_port = n.flow.peer_port;
    m.dst_port = n.flow.local_port;
    m.aux_a = uint32_t(n.kind);
    m.aux_b = uint32_t(n.addr);
    m.aux_c = uint32_t(n.len);
    auto hop = route(m);
    if (!hop) {
      tile.count("notify_drop");
      return;
    }
    OutMessage o;
    o.msg = sim::data_message(hop->at, m, {});
    tile.count("notifies_out");
    out.push_back(std::move(o));
  }

  // Mirror bytes the receive ring gained since the last visit.
  void mirror() {
    if (!rx_buf) return;
    for (const auto& [key, flow] : entry.stack->flows()) {
      uint64_t tail = flow.rx.ring.tail();
      uint64_t& done = entry.mirrored[key];
      if (tail <= done) continue;
      size_t len = size_t(tail - done);
      PacketMeta m;
      m.msg_type = proto::MsgType::BufWrite;
      m.ip_src = key.peer_ip;
      m.src_port = key.peer_port;
      m.dst_port = key.local_port;
      m.aux_a = uint32_t(done);  // buffer offset; the buffer wraps
      OutMessage o;
      o.msg = sim::data_message(*rx_buf, m, flow.rx.ring.slice(done, len));
      o.after_tail = true;
      out.push_back(std::move(o));
      tile.count("mirrored_bytes", len);
      done = tail;
    }
  }
};

}  // namespace

// --- tcp_rx ------------------------------------------------------------------

TcpRxLogic::TcpRxLogic(sim::TileEnv env, std::shared_ptr<TcpTileGroup> group)
    : TileLogic(std::move(env)), group_(std::move(group)) {
  entry_ = &group_->entry_for(*this);
}

std::vector<OutMessage> TcpRxLogic::on_message(const noc::NocMessage& in,
                                               uint64_t cycle) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  std::vector<OutMessage> out;
  ActionSink sink{*this, *entry_, tile_coord(param_str("next", "")),
                  tile_coord(param_str("rx_buf", "")),
                  [this](const PacketMeta& m) { return route(m); }, out};
  std::vector<TcpAction> acts;

  switch (meta->msg_type) {
    case proto::MsgType::Data: {
      if (meta->ip_proto != proto::kProtoTcp) {
        count("not_tcp_drop");
        return {};
      }
      auto seg = tcp_parse(meta->ip_src, meta->ip_dst, in.payload);
      if (!seg.ok()) {
        count("bad_segment_drop");
        return {};
      }
      if (meta->has(proto::kLayerEth))
        entry_->eth[meta->ip_src] = {meta->eth_src, meta->eth_dst};
      entry_->stack->rx_segment(meta->ip_src, meta->ip_dst, *seg, cycle, acts);
      count("segments_in");
      break;
    }
    case proto::MsgType::TcpRecv: {
      // aux_b: bytes the application finished with; aux_a: bytes it now
      // wants to be notified about. Done first so freed space counts.
      FlowKey key = flow_of(*meta);
      if (meta->aux_b)
        entry_->stack->app_rx_done(key, meta->aux_b, cycle, acts);
      if (meta->aux_a)
        entry_->stack->app_rx_request(key, meta->aux_a, cycle, acts);
      count("app_recv_calls");
      break;
    }
    default:
      count("unexpected_drop");
      return {};
  }

  sink.segments_and_notes(acts);
  sink.mirror();
  return out;
}

// --- tcp_tx ------------------------------------------------------------------

TcpTxLogic::TcpTxLogic(sim::TileEnv env, std::shared_ptr<TcpTileGroup> group)
    : TileLogic(std::move(env)), group_(std::move(group)) {
  entry_ = &group_->entry_for(*this);
}

std::vector<OutMessage> TcpTxLogic::on_message(const noc::NocMessage& in,
                                               uint64_t cycle) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  std::vector<OutMessage> out;
  ActionSink sink{*this, *entry_, tile_coord(param_str("next", "")),
                  std::nullopt,
                  [this](const PacketMeta& m) { return route(m); }, out};
  std::vector<TcpAction> acts;

  switch (meta->msg_type) {
    case proto::MsgType::TcpSend: {
      // Payload bytes commit to the stream; aux_a reserves space for more.
      FlowKey key = flow_of(*meta);
      if (!in.payload.empty())
        entry_->stack->app_tx_commit(key, in.payload, cycle);
      if (meta->aux_a)
        entry_->stack->app_tx_reserve(key, meta->aux_a, cycle, acts);
      count("app_send_calls");
      break;
    }
    case proto::MsgType::TcpOpen:
    case proto::MsgType::TcpClose:
      // Passive open only; closes ride the segment path as FINs.
      count("unsupported_drop");
      return {};
    default:
      count("unexpected_drop");
      return {};
  }

  sink.segments_and_notes(acts);
  return out;
}

std::vector<OutMessage> TcpTxLogic::on_tick(uint64_t cycle) {
  std::vector<OutMessage> out;
  ActionSink sink{*this, *entry_, tile_coord(param_str("next", "")),
                  std::nullopt,
                  [this](const PacketMeta& m) { return route(m); }, out};
  std::vector<TcpAction> acts;
  entry_->stack->tx_cycle(cycle, acts);
  sink.segments_and_notes(acts);
  return out;
}

void register_tcp_tiles(sim::Engine::FactoryMap& extra) {
  auto group = std::make_shared<TcpTileGroup>();
  extra[topo::TileKind::TcpRx] = [group](sim::TileEnv env) {
    return std::make_unique<TcpRxLogic>(std::move(env), group);
  };
  extra[topo::TileKind::TcpTx] = [group](sim::TileEnv env) {
    return std::make_unique<TcpTxLogic>(std::move(env), group);
  };
}

}  // namespace meshstack::tcp
