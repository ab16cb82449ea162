#include "meshstack/sim/tiles.hpp"

#include <algorithm>

#include "meshstack/netfn/ctrl.hpp"
#include "meshstack/proto/checksum.hpp"
#include "meshstack/proto/ipv4.hpp"
#include "meshstack/proto/udp.hpp"

namespace meshstack::sim {

using proto::get_u16;
using proto::get_u32;
using proto::kLayerEth;
using proto::kLayerIp;
using proto::kLayerTcp;
using proto::kLayerUdp;
using proto::kLayerVlan;
using proto::kProtoIpInIp;
using proto::kProtoTcp;
using proto::kProtoUdp;
using proto::MsgType;
using proto::PacketMeta;
using proto::put_u16;
using proto::put_u32;

PacketMeta sniff_frame(const std::vector<uint8_t>& frame) {
  PacketMeta m;
  if (frame.size() < 14) return m;
  std::copy_n(frame.begin(), 6, m.eth_dst.begin());
  std::copy_n(frame.begin() + 6, 6, m.eth_src.begin());
  m.layers |= kLayerEth;
  size_t off = 12;
  uint16_t et = get_u16(frame.data() + off);
  off += 2;
  if (et == proto::kEthertypeVlan) {
    if (frame.size() < off + 4) {
      m.ethertype = et;
      return m;
    }
    m.vlan_tci = get_u16(frame.data() + off);
    et = get_u16(frame.data() + off + 2);
    off += 4;
    m.layers |= kLayerVlan;
  }
  m.ethertype = et;
  if (et != proto::kEthertypeIpv4 || frame.size() < off + 20) return m;
  const uint8_t* ip = frame.data() + off;
  if ((ip[0] >> 4) != 4) return m;
  size_t ihl = size_t(ip[0] & 0x0F) * 4;
  if (ihl < 20 || frame.size() < off + ihl) return m;
  m.layers |= kLayerIp;
  m.ip_ttl = ip[8];
  m.ip_proto = ip[9];
  m.ip_src = get_u32(ip + 12);
  m.ip_dst = get_u32(ip + 16);
  size_t l4 = off + ihl;
  if ((m.ip_proto == kProtoUdp || m.ip_proto == kProtoTcp) &&
      frame.size() >= l4 + 4) {
    m.src_port = get_u16(frame.data() + l4);
    m.dst_port = get_u16(frame.data() + l4 + 2);
    m.layers |= m.ip_proto == kProtoUdp ? kLayerUdp : kLayerTcp;
  }
  return m;
}

noc::NocMessage raw_message(noc::Coord dst, std::vector<uint8_t> frame) {
  noc::NocMessage m;
  m.dst = dst;
  m.payload = std::move(frame);
  return m;
}

void append_log_record(std::vector<uint8_t>& out, const LogRecord& r) {
  uint8_t hdr[24] = {};
  put_u32(hdr, r.seq);
  for (int i = 0; i < 8; ++i) hdr[4 + i] = uint8_t(r.cycle >> (56 - 8 * i));
  hdr[12] = r.src.x;
  hdr[13] = r.src.y;
  hdr[14] = r.msg_type;
  hdr[15] = r.control ? 1 : 0;
  put_u16(hdr + 16, uint16_t(r.metadata.size()));
  put_u32(hdr + 18, uint32_t(r.payload.size()));
  out.insert(out.end(), hdr, hdr + 24);
  out.insert(out.end(), r.metadata.begin(), r.metadata.end());
  out.insert(out.end(), r.payload.begin(), r.payload.end());
}

Result<std::vector<LogRecord>> parse_log_records(
    const std::vector<uint8_t>& bytes) {
  using R = Result<std::vector<LogRecord>>;
  std::vector<LogRecord> out;
  size_t off = 0;
  while (off < bytes.size()) {
    if (bytes.size() - off < 24) return R::failure("truncated record header");
    const uint8_t* h = bytes.data() + off;
    LogRecord r;
    r.seq = get_u32(h);
    r.cycle = 0;
    for (int i = 0; i < 8; ++i) r.cycle = r.cycle << 8 | h[4 + i];
    r.src = {h[12], h[13]};
    r.msg_type = h[14];
    r.control = h[15] != 0;
    size_t meta_len = get_u16(h + 16);
    size_t pay_len = get_u32(h + 18);
    off += 24;
    if (bytes.size() - off < meta_len + pay_len)
      return R::failure("truncated record body");
    r.metadata.assign(bytes.begin() + off, bytes.begin() + off + meta_len);
    off += meta_len;
    r.payload.assign(bytes.begin() + off, bytes.begin() + off + pay_len);
    off += pay_len;
    out.push_back(std::move(r));
  }
  return R::success(std::move(out));
}

namespace {

// Metadata flit -> struct, or nullopt (caller counts the drop).
std::optional<PacketMeta> meta_of(const noc::NocMessage& in) {
  auto r = PacketMeta::parse(in.metadata);
  if (!r.ok()) return std::nullopt;
  return *r;
}

}  // namespace

// --- eth_rx ------------------------------------------------------------------

std::vector<OutMessage> EthRxLogic::on_wire_frame(
    const std::vector<uint8_t>& frame, uint64_t) {
  count("wire_frames");
  return handle_frame(frame, -1);
}

std::vector<OutMessage> EthRxLogic::on_message(const noc::NocMessage& in,
                                               uint64_t) {
  // A raw frame forwarded over the mesh by a wire-facing dispatcher. The
  // frame bytes sit one flit later when a metadata flit precedes them.
  count("mesh_frames");
  return handle_frame(in.payload, in.metadata.empty() ? 0 : 1);
}

std::vector<OutMessage> EthRxLogic::handle_frame(
    const std::vector<uint8_t>& frame, int lead) {
  auto f = proto::eth_parse(frame);
  if (!f.ok()) {
    count("bad_frame_drop");
    return {};
  }
  PacketMeta meta;
  meta.layers = kLayerEth;
  meta.eth_dst = f->dst;
  meta.eth_src = f->src;
  meta.ethertype = f->ethertype;
  if (f->vlan_tci) {
    meta.layers |= kLayerVlan;
    meta.vlan_tci = *f->vlan_tci;
  }
  auto hop = route(meta);
  if (!hop) return {};
  count("frames_in");
  count("bytes_in", frame.size());
  OutMessage o;
  o.msg = data_message(hop->at, meta, std::move(f->payload));
  o.lead = lead;
  return {std::move(o)};
}

// --- eth_tx ------------------------------------------------------------------

std::vector<OutMessage> EthTxLogic::on_message(const noc::NocMessage& in,
                                               uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  proto::EthFrame f;
  f.dst = meta->eth_dst;
  f.src = meta->eth_src;
  f.ethertype = meta->ethertype;
  if (meta->has(kLayerVlan)) f.vlan_tci = meta->vlan_tci;
  f.payload = in.payload;
  count("frames_out");
  OutMessage o;
  o.msg.payload = proto::eth_build(f);
  o.to_wire = true;
  o.lead = 2;
  count("bytes_out", o.msg.payload.size());
  return {std::move(o)};
}

// --- ip_rx -------------------------------------------------------------------

std::vector<OutMessage> IpRxLogic::on_message(const noc::NocMessage& in,
                                              uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  auto p = proto::ipv4_parse(in.payload);
  if (!p.ok()) {
    count("bad_ip_drop");
    return {};
  }
  meta->layers |= kLayerIp;
  meta->ip_src = p->src;
  meta->ip_dst = p->dst;
  meta->ip_proto = p->protocol;
  meta->ip_ttl = p->ttl;
  auto hop = route(*meta);
  if (!hop) return {};
  count("packets_in");
  OutMessage o;
  o.msg = data_message(hop->at, *meta, std::move(p->payload));
  o.lead = 1;
  return {std::move(o)};
}

// --- ip_tx -------------------------------------------------------------------

std::vector<OutMessage> IpTxLogic::on_message(const noc::NocMessage& in,
                                              uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  proto::Ipv4Packet p;
  p.ttl = uint8_t(param_int("ttl", 64));
  p.protocol = meta->ip_proto;
  p.src = meta->ip_src;
  p.dst = meta->ip_dst;
  p.identification = next_ident_++;
  p.payload = in.payload;
  meta->layers |= kLayerIp;
  meta->ip_ttl = p.ttl;
  auto hop = route(*meta);
  if (!hop) return {};
  count("packets_out");
  OutMessage o;
  o.msg = data_message(hop->at, *meta, proto::ipv4_build(p));
  return {std::move(o)};
}

// --- udp_rx ------------------------------------------------------------------

std::vector<OutMessage> UdpRxLogic::on_message(const noc::NocMessage& in,
                                               uint64_t) {
  auto meta = meta_of(in);
  if (!meta || !meta->has(kLayerIp)) {
    count("missing_meta_drop");
    return {};
  }
  auto r = proto::udp_parse(meta->ip_src, meta->ip_dst, in.payload);
  if (!r.ok()) {
    count("bad_udp_drop");
    return {};
  }
  meta->layers |= kLayerUdp;
  meta->src_port = r->dgram.src_port;
  meta->dst_port = r->dgram.dst_port;
  meta->l4_len = uint16_t(r->dgram.payload.size());
  meta->payload_sum16 = r->payload_sum16;
  auto hop = route(*meta);
  if (!hop) return {};
  count("datagrams_in");
  OutMessage o;
  o.msg = data_message(hop->at, *meta, std::move(r->dgram.payload));
  o.lead = 1;
  return {std::move(o)};
}

// --- udp_tx ------------------------------------------------------------------

std::vector<OutMessage> UdpTxLogic::on_message(const noc::NocMessage& in,
                                               uint64_t) {
  auto meta = meta_of(in);
  if (!meta || !meta->has(kLayerIp)) {
    count("missing_meta_drop");
    return {};
  }
  proto::UdpDatagram d;
  d.src_port = meta->src_port;
  d.dst_port = meta->dst_port;
  d.payload = in.payload;
  bool cut_through = meta->payload_sum16.has_value();
  std::vector<uint8_t> bytes =
      cut_through
          ? proto::udp_build_with_sum(meta->ip_src, meta->ip_dst, d,
                                      *meta->payload_sum16)
          : proto::udp_build(meta->ip_src, meta->ip_dst, d);
  meta->layers |= kLayerUdp;
  meta->ip_proto = kProtoUdp;
  meta->l4_len = uint16_t(d.payload.size());
  auto hop = route(*meta);
  if (!hop) return {};
  count(cut_through ? "cut_through" : "summed_at_tail");
  count("datagrams_out");
  OutMessage o;
  o.msg = data_message(hop->at, *meta, std::move(bytes));
  // Without a precomputed payload fold, the header checksum is only known
  // once the whole payload has streamed in.
  o.after_tail = !cut_through;
  return {std::move(o)};
}

// --- echo --------------------------------------------------------------------

std::vector<OutMessage> EchoLogic::on_message(const noc::NocMessage& in,
                                              uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  std::swap(meta->eth_dst, meta->eth_src);
  std::swap(meta->ip_src, meta->ip_dst);
  std::swap(meta->src_port, meta->dst_port);
  auto hop = route(*meta);
  if (!hop) return {};
  count("echoed");
  count("echoed_bytes", in.payload.size());
  OutMessage o;
  o.msg = data_message(hop->at, *meta, in.payload);
  return {std::move(o)};
}

// --- scheduler ---------------------------------------------------------------

std::vector<OutMessage> SchedulerLogic::on_wire_frame(
    const std::vector<uint8_t>& frame, uint64_t) {
  auto hop = route(sniff_frame(frame));
  if (!hop) return {};
  count("dispatched");
  OutMessage o;
  o.msg = raw_message(hop->at, frame);
  o.lead = -1;
  return {std::move(o)};
}

std::vector<OutMessage> SchedulerLogic::on_message(const noc::NocMessage& in,
                                                   uint64_t) {
  OutMessage o;
  if (auto meta = meta_of(in)) {
    auto hop = route(*meta);
    if (!hop) return {};
    o.msg = data_message(hop->at, *meta, in.payload);
  } else {
    // Raw frame riding the mesh; classify by sniffing, forward unchanged.
    auto hop = route(sniff_frame(in.payload));
    if (!hop) return {};
    o.msg = raw_message(hop->at, in.payload);
  }
  count("dispatched");
  return {std::move(o)};
}

// --- relay -------------------------------------------------------------------

RelayLogic::RelayLogic(TileEnv env)
    : TileLogic(std::move(env)), rng_(env_.seed) {
  if (const auto* n = param("next")) next_ = tile_coord(*n);
  if (const auto* d = param("gen_dst")) gen_dst_ = tile_coord(*d);
  gen_len_ = uint64_t(param_int("gen_len", 64));
  gen_every_ = uint64_t(param_int("gen_every", 0));
  gen_count_ = uint64_t(param_int("gen_count", 0));
  gen_start_ = uint64_t(param_int("gen_start", 0));
}

std::vector<OutMessage> RelayLogic::on_message(const noc::NocMessage& in,
                                               uint64_t) {
  count("relayed");
  count("relayed_bytes", in.payload.size());
  std::optional<noc::Coord> dst = next_;
  if (!dst && !env_.table.empty()) {
    PacketMeta m;
    if (auto parsed = meta_of(in)) m = *parsed;
    if (auto hop = route(m)) dst = hop->at;
    else return {};
  }
  if (!dst) {
    count("sunk");
    count("sunk_bytes", in.payload.size());
    return {};
  }
  OutMessage o;
  o.msg = in;
  o.msg.dst = *dst;
  return {std::move(o)};
}

std::vector<OutMessage> RelayLogic::on_tick(uint64_t cycle) {
  if (!gen_dst_ || cycle < gen_start_) return {};
  if (gen_count_ && emitted_ >= gen_count_) return {};
  if (gen_every_ && (cycle - gen_start_) % gen_every_ != 0) return {};
  if (out_depth() >= 2) return {};  // self-pace against backpressure
  std::vector<uint8_t> payload(std::max<uint64_t>(gen_len_, 8));
  for (int i = 0; i < 8; ++i) payload[i] = uint8_t(emitted_ >> (56 - 8 * i));
  for (size_t i = 8; i < payload.size(); ++i) payload[i] = uint8_t(rng_());
  PacketMeta meta;
  meta.msg_type = MsgType::Raw;
  meta.aux_a = uint32_t(emitted_);
  ++emitted_;
  count("generated");
  OutMessage o;
  o.msg = data_message(*gen_dst_, meta, std::move(payload));
  return {std::move(o)};
}

// --- nat ---------------------------------------------------------------------

NatLogic::NatLogic(TileEnv env) : TileLogic(std::move(env)) {
  if (const auto* m = param("map")) {
    size_t pos = 0;
    while (pos < m->size()) {
      size_t comma = m->find(',', pos);
      std::string pair = m->substr(pos, comma == std::string::npos
                                            ? std::string::npos
                                            : comma - pos);
      pos = comma == std::string::npos ? m->size() : comma + 1;
      size_t gt = pair.find('>');
      if (gt == std::string::npos) {
        count("bad_map_param");
        continue;
      }
      auto vip = proto::ipv4_from_string(pair.substr(0, gt));
      auto backend = proto::ipv4_from_string(pair.substr(gt + 1));
      if (!vip.ok() || !backend.ok()) {
        count("bad_map_param");
        continue;
      }
      vip_to_backend_[*vip] = *backend;
      backend_to_vip_[*backend] = *vip;
    }
  }
  if (const auto* s = param("inbound_next")) inbound_next_ = tile_coord(*s);
  if (const auto* s = param("outbound_next")) outbound_next_ = tile_coord(*s);
}

std::vector<OutMessage> NatLogic::handle_control(const noc::NocMessage& in) {
  auto u = netfn::ControlUpdate::decode(in.payload);
  if (!u.ok()) {
    count("bad_ctrl_drop");
    return {};
  }
  netfn::ControlAck ack;
  ack.generation = u->generation;
  if (u->generation <= generation_) {
    ack.status = netfn::ControlAck::kStale;
    count("ctrl_stale");
  } else {
    if (u->op == netfn::ControlUpdate::kOpSet) {
      auto it = vip_to_backend_.find(u->vip);
      if (it != vip_to_backend_.end()) backend_to_vip_.erase(it->second);
      vip_to_backend_[u->vip] = u->backend;
      backend_to_vip_[u->backend] = u->vip;
    } else {
      auto it = vip_to_backend_.find(u->vip);
      if (it != vip_to_backend_.end()) {
        backend_to_vip_.erase(it->second);
        vip_to_backend_.erase(it);
      }
    }
    generation_ = u->generation;
    ack.status = netfn::ControlAck::kOk;
    count("ctrl_applied");
  }
  OutMessage o;
  o.msg.dst = in.src;
  o.msg.control = true;
  o.msg.payload = ack.encode();
  o.on_control = true;
  o.after_tail = true;
  return {std::move(o)};
}

std::vector<OutMessage> NatLogic::on_message(const noc::NocMessage& in,
                                             uint64_t) {
  if (in.control) return handle_control(in);
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  std::vector<uint8_t> bytes = in.payload;
  if (bytes.size() < 20 || (bytes[0] >> 4) != 4) {
    count("bad_ip_drop");
    return {};
  }
  size_t ihl = size_t(bytes[0] & 0x0F) * 4;
  if (ihl < 20 || bytes.size() < ihl) {
    count("bad_ip_drop");
    return {};
  }
  uint32_t src = get_u32(bytes.data() + 12);
  uint32_t dst = get_u32(bytes.data() + 16);
  uint8_t proto_id = bytes[9];
  uint32_t new_src = src, new_dst = dst;
  std::optional<noc::Coord> fwd;
  if (auto it = vip_to_backend_.find(dst); it != vip_to_backend_.end()) {
    new_dst = it->second;
    fwd = inbound_next_;
    count("rewritten_in");
  } else if (auto it = backend_to_vip_.find(src); it != backend_to_vip_.end()) {
    new_src = it->second;
    fwd = outbound_next_;
    count("rewritten_out");
  } else {
    count("no_mapping_drop");
    return {};
  }
  if (!fwd) {
    count("next_hop_unset_drop");
    return {};
  }
  // Rewrite in place; checksums are patched incrementally so options and
  // payload bytes stream through untouched.
  auto patch = [&](size_t ck_off, uint32_t oldw, uint32_t neww, bool udp) {
    uint16_t ck = get_u16(bytes.data() + ck_off);
    if (udp && ck == 0) return;  // checksum absent stays absent
    ck = proto::checksum_update32(ck, oldw, neww);
    if (udp && ck == 0) ck = 0xFFFF;
    put_u16(bytes.data() + ck_off, ck);
  };
  auto rewrite = [&](size_t addr_off, uint32_t oldw, uint32_t neww) {
    patch(10, oldw, neww, false);  // IP header checksum
    if (proto_id == kProtoUdp && bytes.size() >= ihl + 8)
      patch(ihl + 6, oldw, neww, true);
    else if (proto_id == kProtoTcp && bytes.size() >= ihl + 18)
      patch(ihl + 16, oldw, neww, false);
    put_u32(bytes.data() + addr_off, neww);
  };
  if (new_src != src) rewrite(12, src, new_src);
  if (new_dst != dst) rewrite(16, dst, new_dst);
  meta->ip_src = new_src;
  meta->ip_dst = new_dst;
  OutMessage o;
  o.msg = data_message(*fwd, *meta, std::move(bytes));
  return {std::move(o)};
}

// --- ip_encap / ip_decap -----------------------------------------------------

IpEncapLogic::IpEncapLogic(TileEnv env) : TileLogic(std::move(env)) {
  if (const auto* s = param("src"))
    if (auto a = proto::ipv4_from_string(*s); a.ok()) tunnel_src_ = *a;
  if (const auto* s = param("dst"))
    if (auto a = proto::ipv4_from_string(*s); a.ok()) tunnel_dst_ = *a;
}

std::vector<OutMessage> IpEncapLogic::on_message(const noc::NocMessage& in,
                                                 uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  proto::Ipv4Packet outer;
  outer.protocol = kProtoIpInIp;
  outer.src = tunnel_src_;
  outer.dst = tunnel_dst_;
  outer.ttl = uint8_t(param_int("ttl", 64));
  outer.identification = next_ident_++;
  outer.payload = in.payload;
  meta->layers |= kLayerIp;
  meta->ip_src = outer.src;
  meta->ip_dst = outer.dst;
  meta->ip_proto = outer.protocol;
  meta->ip_ttl = outer.ttl;
  auto hop = route(*meta);
  if (!hop) return {};
  count("encapsulated");
  OutMessage o;
  o.msg = data_message(hop->at, *meta, proto::ipv4_build(outer));
  return {std::move(o)};
}

std::vector<OutMessage> IpDecapLogic::on_message(const noc::NocMessage& in,
                                                 uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  auto outer = proto::ipv4_parse(in.payload);
  if (!outer.ok()) {
    count("bad_outer_drop");
    return {};
  }
  if (outer->protocol != kProtoIpInIp) {
    count("not_tunnel_drop");
    return {};
  }
  // Surface the inner packet's addressing for downstream routing.
  if (auto inner = proto::ipv4_parse(outer->payload); inner.ok()) {
    meta->ip_src = inner->src;
    meta->ip_dst = inner->dst;
    meta->ip_proto = inner->protocol;
    meta->ip_ttl = inner->ttl;
  }
  auto hop = route(*meta);
  if (!hop) return {};
  count("decapsulated");
  OutMessage o;
  o.msg = data_message(hop->at, *meta, std::move(outer->payload));
  o.lead = 1;
  return {std::move(o)};
}

// --- buffer ------------------------------------------------------------------

BufferLogic::BufferLogic(TileEnv env) : TileLogic(std::move(env)) {
  store_.resize(size_t(param_int("capacity", 1 << 20)));
}

std::vector<OutMessage> BufferLogic::on_message(const noc::NocMessage& in,
                                                uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  PacketMeta reply = *meta;
  OutMessage o;
  switch (meta->msg_type) {
    case MsgType::BufWrite: {
      size_t off = meta->aux_a;
      for (size_t i = 0; i < in.payload.size(); ++i)
        store_[(off + i) % store_.size()] = in.payload[i];
      count("writes");
      count("bytes_written", in.payload.size());
      reply.msg_type = MsgType::BufWriteAck;
      reply.aux_b = uint32_t(in.payload.size());
      o.msg = data_message(in.src, reply, {});
      o.after_tail = true;  // acknowledged only once fully stored
      return {std::move(o)};
    }
    case MsgType::BufRead: {
      size_t off = meta->aux_a;
      size_t len = std::min<size_t>(meta->aux_b, store_.size());
      std::vector<uint8_t> data(len);
      for (size_t i = 0; i < len; ++i) data[i] = store_[(off + i) % store_.size()];
      count("reads");
      count("bytes_read", len);
      reply.msg_type = MsgType::BufReadResp;
      reply.aux_b = uint32_t(len);
      o.msg = data_message(in.src, reply, std::move(data));
      o.after_tail = true;
      return {std::move(o)};
    }
    default: {
      // A buffer tile can also sit inside a packet chain as a
      // store-and-forward stage that absorbs a whole message before
      // re-emitting it, cutting wormhole dependency spans.
      auto hop = route(*meta);
      if (!hop) {
        count("unexpected_drop");
        return {};
      }
      count("forwarded");
      o.msg = data_message(hop->at, *meta, in.payload);
      o.after_tail = true;
      return {std::move(o)};
    }
  }
}

// --- logger ------------------------------------------------------------------

LoggerLogic::LoggerLogic(TileEnv env) : TileLogic(std::move(env)) {
  depth_ = size_t(param_int("depth", 4096));
}

std::vector<OutMessage> LoggerLogic::on_message(const noc::NocMessage& in,
                                                uint64_t cycle) {
  std::optional<PacketMeta> meta = meta_of(in);
  if (meta && meta->msg_type == MsgType::LogReadReq) {
    // Never let readback congestion wedge the capture path: shed instead.
    if (out_depth() >= 4) {
      count("readback_shed");
      return {};
    }
    uint32_t start = meta->aux_a;
    uint32_t want = meta->aux_b ? meta->aux_b : 32;
    uint32_t maxn = std::min<uint32_t>(want, 32);
    std::vector<uint8_t> body;
    uint32_t n = 0;
    for (const auto& r : ring_) {
      if (r.seq < start || n >= maxn) continue;
      append_log_record(body, r);
      ++n;
    }
    PacketMeta resp;
    resp.msg_type = MsgType::LogReadResp;
    resp.aux_a = start;
    resp.aux_b = n;
    resp.aux_c = seq_;  // high watermark: next sequence to be assigned
    count("readbacks");
    OutMessage o;
    o.msg = data_message(in.src, resp, std::move(body));
    o.after_tail = true;
    return {std::move(o)};
  }
  LogRecord r;
  r.seq = seq_++;
  r.cycle = cycle;
  r.src = in.src;
  r.msg_type = meta ? uint8_t(meta->msg_type) : uint8_t(MsgType::Raw);
  r.control = in.control;
  r.metadata = in.metadata;
  r.payload = in.payload;
  ring_.push_back(std::move(r));
  if (ring_.size() > depth_) ring_.pop_front();
  count("logged");
  return {};
}

// --- factory -----------------------------------------------------------------

std::unique_ptr<TileLogic> make_builtin_tile(topo::TileKind kind, TileEnv env) {
  using topo::TileKind;
  switch (kind) {
    case TileKind::EthRx: return std::make_unique<EthRxLogic>(std::move(env));
    case TileKind::EthTx: return std::make_unique<EthTxLogic>(std::move(env));
    case TileKind::IpRx: return std::make_unique<IpRxLogic>(std::move(env));
    case TileKind::IpTx: return std::make_unique<IpTxLogic>(std::move(env));
    case TileKind::UdpRx: return std::make_unique<UdpRxLogic>(std::move(env));
    case TileKind::UdpTx: return std::make_unique<UdpTxLogic>(std::move(env));
    case TileKind::Echo: return std::make_unique<EchoLogic>(std::move(env));
    case TileKind::Scheduler:
      return std::make_unique<SchedulerLogic>(std::move(env));
    case TileKind::Relay: return std::make_unique<RelayLogic>(std::move(env));
    case TileKind::Nat: return std::make_unique<NatLogic>(std::move(env));
    case TileKind::IpEncap:
      return std::make_unique<IpEncapLogic>(std::move(env));
    case TileKind::IpDecap:
      return std::make_unique<IpDecapLogic>(std::move(env));
    case TileKind::Buffer: return std::make_unique<BufferLogic>(std::move(env));
    case TileKind::Logger: return std::make_unique<LoggerLogic>(std::move(env));
    default: return nullptr;
  }
}

}  // namespace meshstack::sim
