#include "meshstack/tcp/engine.hpp"

#include <algorithm>
#include <cstring>

namespace meshstack::tcp {

using proto::TcpSegment;

namespace {

constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

uint64_t fnv_mix(uint64_t h, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= kFnvPrime;
  }
  return h;
}

uint32_t adv_window_of(const RxOwned& rx) {
  return uint32_t(std::min<size_t>(rx.ring.free(), 0xFFFF));
}

}  // namespace

uint64_t unwrap_near(uint64_t near, uint32_t wire) {
  uint64_t cand = (near & ~0xFFFFFFFFull) | wire;
  if (cand + (1ull << 31) < near) return cand + (1ull << 32);
  if (cand > near + (1ull << 31) && cand >= (1ull << 32))
    return cand - (1ull << 32);
  return cand;
}

const char* to_string(ConnState s) {
  switch (s) {
    case ConnState::Listen: return "LISTEN";
    case ConnState::SynRcvd: return "SYN_RCVD";
    case ConnState::Established: return "ESTABLISHED";
    case ConnState::Closing: return "CLOSING";
    case ConnState::Closed: return "CLOSED";
  }
  return "?";
}

std::string to_string(const FlowKey& k) {
  return std::to_string(k.peer_ip >> 24) + "." +
         std::to_string((k.peer_ip >> 16) & 0xFF) + "." +
         std::to_string((k.peer_ip >> 8) & 0xFF) + "." +
         std::to_string(k.peer_ip & 0xFF) + ":" + std::to_string(k.peer_port) +
         "->" + std::to_string(k.local_port);
}

// --- StreamRing ----------------------------------------------------------------

void StreamRing::append(ByteView bytes) {
  size_t n = std::min(bytes.size(), free());
  for (size_t i = 0; i < n; ++i)
    data_[size_t((tail_ + i) % data_.size())] = bytes[i];
  tail_ += n;
}

void StreamRing::copy(uint64_t off, size_t n, uint8_t* out) const {
  for (size_t i = 0; i < n; ++i)
    out[i] = data_[size_t((off + i) % data_.size())];
}

std::vector<uint8_t> StreamRing::slice(uint64_t off, size_t n) const {
  std::vector<uint8_t> v(n);
  copy(off, n, v.data());
  return v;
}

// --- emission (the shared merge point onto the IP path) -------------------------

namespace {

struct Emitter {
  TcpStack::Flow& flow;
  const TcpStack::Config& cfg;
  std::map<std::string, uint64_t>& counters;
  std::vector<TcpAction>& out;

  void segment(TcpSegment s) {
    s.src_port = flow.key.local_port;
    s.dst_port = flow.key.peer_port;
    if (s.flags & proto::kTcpAck) {
      // Monotone-ACK latch: a data segment stamped from a one-cycle-old
      // snapshot must not step the ACK field backwards after a fresher
      // pure ACK already left.
      if (flow.last_ack_valid && seq_diff(s.ack, flow.last_ack) < 0) {
        s.ack = flow.last_ack;
        ++counters["ack_latch_holds"];
      }
      flow.last_ack = s.ack;
      flow.last_ack_valid = true;
    }
    TcpAction a;
    a.kind = TcpAction::Kind::Segment;
    a.src_ip = cfg.local_ip;
    a.dst_ip = flow.key.peer_ip;
    a.seg = std::move(s);
    out.push_back(std::move(a));
    ++counters["segments_out"];
  }

  void notify(AppNotification::Kind k, uint64_t addr, uint64_t len) {
    TcpAction a;
    a.kind = TcpAction::Kind::Notify;
    a.note = AppNotification{k, flow.key, addr, len};
    out.push_back(std::move(a));
    ++counters["notifications"];
  }
};

// --- receive engine (writes RxOwned only) ----------------------------------------

void rx_check_ready(RxOwned& rx, Emitter& em) {
  if (rx.rx_request && rx.ring.size() >= rx.rx_request) {
    em.notify(AppNotification::Kind::RxReady,
              rx.ring.head() % rx.ring.capacity(), rx.rx_request);
    ++em.counters["rx_ready"];
    rx.rx_request = 0;
  }
}

void rx_emit_synack(const RxOwned& rx, uint32_t iss, Emitter& em) {
  TcpSegment s;
  s.flags = proto::kTcpSyn | proto::kTcpAck;
  s.seq = iss;
  s.ack = rx.rcv_nxt();
  s.window = uint16_t(adv_window_of(rx));
  em.segment(std::move(s));
  ++em.counters["syn_acks"];
}

void rx_emit_ack(const RxOwned& rx, const TxSnapshot& txs, Emitter& em) {
  TcpSegment s;
  s.flags = proto::kTcpAck;
  s.seq = txs.snd_nxt32;
  s.ack = rx.rcv_nxt();
  s.window = uint16_t(adv_window_of(rx));
  em.segment(std::move(s));
}

void rx_handle_segment(RxOwned& rx, const TxSnapshot& txs, uint32_t iss,
                       const TcpSegment& seg, Emitter& em) {
  switch (rx.state) {
    case ConnState::Listen: {
      if ((seg.flags & proto::kTcpSyn) && !(seg.flags & proto::kTcpAck)) {
        rx.irs = seg.seq;
        rx.rcv_off = 0;
        rx.fin_received = false;
        rx.peer_window = seg.window;
        rx.state = ConnState::SynRcvd;
        ++em.counters["syn_rcvd"];
        rx_emit_synack(rx, iss, em);
      } else {
        ++em.counters["listen_drop"];
      }
      return;
    }
    case ConnState::SynRcvd: {
      if (seg.flags & proto::kTcpSyn) {
        // Retransmitted SYN: the SYN-ACK was lost.
        rx_emit_synack(rx, iss, em);
        ++em.counters["syn_ack_rtx"];
        return;
      }
      if ((seg.flags & proto::kTcpAck) && seg.ack == iss + 1) {
        rx.state = ConnState::Established;
        rx.ack_off = 0;
        rx.peer_window = seg.window;
        ++em.counters["established"];
        em.notify(AppNotification::Kind::ConnEstablished, 0, 0);
        break;  // the establishing ACK may carry payload
      }
      ++em.counters["handshake_drop"];
      return;
    }
    case ConnState::Established:
    case ConnState::Closing:
      break;
    case ConnState::Closed:
      ++em.counters["closed_drop"];
      return;
  }

  // ESTABLISHED / CLOSING path.
  rx.peer_window = seg.window;
  if (seg.flags & proto::kTcpAck) {
    uint64_t a = unwrap_near(rx.ack_off, seg.ack - (iss + 1));
    if (a > rx.ack_off) {
      rx.ack_off = a;
      rx.dup_ack_count = 0;
    } else if (a == rx.ack_off && seg.payload.empty() &&
               !(seg.flags & (proto::kTcpSyn | proto::kTcpFin)) &&
               txs.nxt_off > rx.ack_off) {
      ++rx.dup_ack_count;
      ++em.counters["dup_acks"];
    }
  }

  bool want_ack = false;
  if (!seg.payload.empty()) {
    if (rx.state == ConnState::Closing) {
      ++em.counters["late_data_drop"];
      want_ack = true;
    } else {
      uint64_t s = unwrap_near(rx.rcv_off, seg.seq - (rx.irs + 1));
      if (s == rx.rcv_off) {
        size_t take = std::min(seg.payload.size(), rx.ring.free());
        rx.ring.append(ByteView(seg.payload.data(), take));
        rx.rcv_off += take;
        em.counters["rx_bytes"] += take;
        if (take < seg.payload.size()) ++em.counters["rx_ring_full_trunc"];
      } else {
        ++em.counters["out_of_order_drop"];
      }
      want_ack = true;  // cumulative ACK either way; duplicates teach the peer
    }
  }

  if (seg.flags & proto::kTcpFin) {
    uint64_t fin_at =
        unwrap_near(rx.rcv_off, seg.seq + uint32_t(seg.payload.size()) -
                                    (rx.irs + 1));
    if (!rx.fin_received && fin_at == rx.rcv_off) {
      rx.fin_received = true;
      rx.state = ConnState::Closing;
      ++em.counters["fin_rcvd"];
    }
    want_ack = true;
  }

  if (want_ack) rx_emit_ack(rx, txs, em);
  rx_check_ready(rx, em);
}

// --- transmit engine (writes TxOwned only) ---------------------------------------

void tx_emit_data(const TxOwned& tx, const RxSnapshot& rxs, uint32_t iss,
                  uint64_t off, size_t len, Emitter& em) {
  TcpSegment s;
  s.flags = proto::kTcpAck | proto::kTcpPsh;
  s.seq = iss + 1 + uint32_t(off);
  s.ack = rxs.rcv_nxt32;
  s.window = uint16_t(rxs.adv_window);
  s.payload = tx.ring.slice(off, len);
  em.segment(std::move(s));
}

void tx_check_space(TxOwned& tx, Emitter& em) {
  if (tx.tx_reserve && tx.ring.free() >= tx.tx_reserve) {
    em.notify(AppNotification::Kind::TxSpace,
              tx.ring.tail() % tx.ring.capacity(), tx.tx_reserve);
    ++em.counters["tx_space"];
    tx.tx_reserve = 0;
  }
}

void tx_step_flow(TxOwned& tx, const RxSnapshot& rxs, uint32_t iss,
                  const TcpStack::Config& cfg, uint64_t cycle, Emitter& em) {
  if (!tx.inited) {
    if (rxs.state != ConnState::Established && rxs.state != ConnState::Closing)
      return;
    tx.inited = true;
    tx.una_off = tx.nxt_off = 0;
  }

  // Absorb the snapshot's cumulative ACK.
  if (rxs.ack_off > tx.una_off) {
    uint64_t n = rxs.ack_off - tx.una_off;
    tx.ring.release(size_t(n));
    tx.una_off = rxs.ack_off;
    tx.retransmit_pending = false;
    tx.rtx_cause = 0;
    tx.rtx_fired_valid = false;
    tx.rto_deadline = tx.una_off < tx.nxt_off ? cycle + cfg.rto : 0;
    em.counters["tx_acked_bytes"] += n;
  }

  // Fast retransmit: third duplicate ACK, once per snd_una level.
  if (rxs.dup_ack_count >= uint32_t(cfg.dupack_threshold) &&
      tx.una_off < tx.nxt_off && !tx.retransmit_pending &&
      !(tx.rtx_fired_valid && tx.rtx_fired_at == tx.una_off)) {
    tx.retransmit_pending = true;
    tx.rtx_cause = 1;
  }

  // Coarse timer: fast retransmit alone cannot recover a lost tail.
  if (tx.rto_deadline && cycle >= tx.rto_deadline && tx.una_off < tx.nxt_off) {
    tx.retransmit_pending = true;
    tx.rtx_cause = 2;
    tx.rtx_fired_valid = false;
    tx.rto_deadline = cycle + cfg.rto;
    ++em.counters["rto_fires"];
  }

  int budget = cfg.segs_per_cycle;
  if (tx.retransmit_pending && budget > 0 && tx.una_off < tx.nxt_off) {
    size_t len = size_t(std::min<uint64_t>(cfg.mss, tx.nxt_off - tx.una_off));
    tx_emit_data(tx, rxs, iss, tx.una_off, len, em);
    if (tx.rtx_cause == 2) {
      ++em.counters["rto_retransmits"];
    } else {
      ++em.counters["fast_retransmits"];
      tx.rtx_fired_valid = true;
      tx.rtx_fired_at = tx.una_off;
    }
    tx.retransmit_pending = false;
    tx.rtx_cause = 0;
    tx.rto_deadline = cycle + cfg.rto;
    --budget;
  }

  while (budget > 0) {
    uint64_t avail = tx.ring.tail() - tx.nxt_off;
    uint64_t inflight = tx.nxt_off - tx.una_off;
    uint64_t wnd = rxs.peer_window > inflight ? rxs.peer_window - inflight : 0;
    size_t len = size_t(std::min<uint64_t>({cfg.mss, avail, wnd}));
    if (len == 0) break;
    if (inflight + len > rxs.peer_window) ++em.counters["window_overruns"];
    tx_emit_data(tx, rxs, iss, tx.nxt_off, len, em);
    tx.nxt_off += len;
    if (!tx.rto_deadline) tx.rto_deadline = cycle + cfg.rto;
    ++em.counters["data_segments"];
    em.counters["tx_stream_bytes"] += len;
    --budget;
  }

  tx_check_space(tx, em);
}

RxSnapshot snap_of(const RxOwned& rx) {
  RxSnapshot s;
  s.state = rx.state;
  s.rcv_nxt32 = rx.rcv_nxt();
  s.ack_off = rx.ack_off;
  s.dup_ack_count = rx.dup_ack_count;
  s.peer_window = rx.peer_window;
  s.adv_window = adv_window_of(rx);
  return s;
}

TxSnapshot snap_of(const TxOwned& tx, uint32_t iss) {
  TxSnapshot s;
  s.inited = tx.inited;
  s.una_off = tx.una_off;
  s.nxt_off = tx.nxt_off;
  s.snd_nxt32 = iss + 1 + uint32_t(tx.nxt_off);
  return s;
}

}  // namespace

// --- TcpStack --------------------------------------------------------------------

TcpStack::TcpStack(Config cfg) : cfg_(std::move(cfg)) {}

uint32_t TcpStack::isn_for(const FlowKey& key) const {
  if (cfg_.forced_iss) return *cfg_.forced_iss;
  uint64_t h = kFnvOffset;
  h = fnv_mix(h, cfg_.seed);
  h = fnv_mix(h, key.peer_ip);
  h = fnv_mix(h, (uint64_t(key.peer_port) << 16) | key.local_port);
  return uint32_t(h ^ (h >> 32));
}

TcpStack::Flow& TcpStack::flow_for(const FlowKey& key) {
  auto it = flows_.find(key);
  if (it == flows_.end()) {
    Flow f(key, cfg_.ring_capacity);
    f.iss = isn_for(key);
    f.tx_snap = snap_of(f.tx, f.iss);
    f.rx_snap = snap_of(f.rx);
    it = flows_.emplace(key, std::move(f)).first;
  }
  return it->second;
}

void TcpStack::roll_snapshots(uint64_t cycle) {
  if (cycle == cur_cycle_) return;
  // Nothing ran since the last boundary, so the current state is exactly the
  // previous cycle's end state: the one-cycle-delayed wires publish it now.
  for (auto& [k, f] : flows_) {
    f.rx_snap = snap_of(f.rx);
    f.tx_snap = snap_of(f.tx, f.iss);
  }
  cur_cycle_ = cycle;
}

uint64_t TcpStack::hash_rx(const RxOwned& rx) const {
  uint64_t h = kFnvOffset;
  h = fnv_mix(h, uint64_t(rx.state));
  h = fnv_mix(h, rx.irs);
  h = fnv_mix(h, rx.rcv_off);
  h = fnv_mix(h, rx.ack_off);
  h = fnv_mix(h, rx.dup_ack_count);
  h = fnv_mix(h, rx.peer_window);
  h = fnv_mix(h, rx.ring.head());
  h = fnv_mix(h, rx.ring.tail());
  h = fnv_mix(h, rx.rx_request);
  h = fnv_mix(h, rx.fin_received);
  return h;
}

uint64_t TcpStack::hash_tx(const TxOwned& tx) const {
  uint64_t h = kFnvOffset;
  h = fnv_mix(h, tx.inited);
  h = fnv_mix(h, tx.una_off);
  h = fnv_mix(h, tx.nxt_off);
  h = fnv_mix(h, tx.ring.head());
  h = fnv_mix(h, tx.ring.tail());
  h = fnv_mix(h, tx.retransmit_pending);
  h = fnv_mix(h, tx.rtx_cause);
  h = fnv_mix(h, tx.rtx_fired_valid);
  h = fnv_mix(h, tx.rtx_fired_at);
  h = fnv_mix(h, tx.rto_deadline);
  h = fnv_mix(h, tx.tx_reserve);
  return h;
}

void TcpStack::rx_segment(uint32_t src_ip, uint32_t dst_ip,
                          const proto::TcpSegment& seg, uint64_t cycle,
                          std::vector<TcpAction>& out) {
  roll_snapshots(cycle);
  count("segments_in");
  if (cfg_.local_ip && dst_ip != cfg_.local_ip) {
    count("wrong_ip_drop");
    return;
  }
  FlowKey key{src_ip, seg.src_port, seg.dst_port};
  auto it = flows_.find(key);
  if (it != flows_.end() && it->second.rx.state == ConnState::Closed &&
      (seg.flags & proto::kTcpSyn) && !(seg.flags & proto::kTcpAck)) {
    flows_.erase(it);  // key reuse after teardown: a fresh connection
    it = flows_.end();
  }
  Flow* fp = nullptr;
  if (it == flows_.end()) {
    bool listening = std::find(cfg_.listen_ports.begin(),
                               cfg_.listen_ports.end(),
                               seg.dst_port) != cfg_.listen_ports.end();
    if (!listening || !(seg.flags & proto::kTcpSyn) ||
        (seg.flags & proto::kTcpAck)) {
      count("no_flow_drop");
      return;
    }
    fp = &flow_for(key);
  } else {
    fp = &it->second;
  }
  Flow& f = *fp;
  if (seg.flags & proto::kTcpRst) {
    f.rx.state = ConnState::Closed;
    count("rst_teardown");
    return;
  }
  Emitter em{f, cfg_, counters_, out};
  uint64_t guard = cfg_.check_discipline ? hash_tx(f.tx) : 0;
  rx_handle_segment(f.rx, f.tx_snap, f.iss, seg, em);
  if (cfg_.check_discipline && hash_tx(f.tx) != guard)
    ++discipline_violations_;
}

void TcpStack::app_rx_request(const FlowKey& key, uint64_t nbytes,
                              uint64_t cycle, std::vector<TcpAction>& out) {
  roll_snapshots(cycle);
  auto it = flows_.find(key);
  if (it == flows_.end()) return;
  Flow& f = it->second;
  Emitter em{f, cfg_, counters_, out};
  if (nbytes == 0 || nbytes > f.rx.ring.capacity()) {
    em.notify(AppNotification::Kind::Reject, 0, nbytes);
    count("rejects");
    return;
  }
  uint64_t guard = cfg_.check_discipline ? hash_tx(f.tx) : 0;
  f.rx.rx_request = nbytes;
  rx_check_ready(f.rx, em);
  if (cfg_.check_discipline && hash_tx(f.tx) != guard)
    ++discipline_violations_;
}

void TcpStack::app_rx_done(const FlowKey& key, uint64_t nbytes, uint64_t cycle,
                           std::vector<TcpAction>& out) {
  roll_snapshots(cycle);
  auto it = flows_.find(key);
  if (it == flows_.end()) return;
  Flow& f = it->second;
  if (f.rx.state != ConnState::Established && f.rx.state != ConnState::Closing)
    return;
  uint64_t guard = cfg_.check_discipline ? hash_tx(f.tx) : 0;
  f.rx.ring.release(size_t(nbytes));
  Emitter em{f, cfg_, counters_, out};
  // Window update: a peer stalled on a zero advertisement needs to hear
  // that space opened up.
  rx_emit_ack(f.rx, f.tx_snap, em);
  count("window_updates");
  rx_check_ready(f.rx, em);
  if (cfg_.check_discipline && hash_tx(f.tx) != guard)
    ++discipline_violations_;
}

void TcpStack::app_tx_reserve(const FlowKey& key, uint64_t nbytes,
                              uint64_t cycle, std::vector<TcpAction>& out) {
  roll_snapshots(cycle);
  auto it = flows_.find(key);
  if (it == flows_.end()) return;
  Flow& f = it->second;
  Emitter em{f, cfg_, counters_, out};
  if (nbytes == 0 || nbytes > f.tx.ring.capacity()) {
    em.notify(AppNotification::Kind::Reject, 0, nbytes);
    count("rejects");
    return;
  }
  uint64_t guard = cfg_.check_discipline ? hash_rx(f.rx) : 0;
  f.tx.tx_reserve = nbytes;
  tx_check_space(f.tx, em);
  if (cfg_.check_discipline && hash_rx(f.rx) != guard)
    ++discipline_violations_;
}

void TcpStack::app_tx_commit(const FlowKey& key, ByteView bytes,
                             uint64_t cycle) {
  roll_snapshots(cycle);
  auto it = flows_.find(key);
  if (it == flows_.end()) return;
  Flow& f = it->second;
  uint64_t guard = cfg_.check_discipline ? hash_rx(f.rx) : 0;
  size_t take = std::min(bytes.size(), f.tx.ring.free());
  f.tx.ring.append(ByteView(bytes.data(), take));
  if (take < bytes.size()) count("tx_overcommit");
  count("tx_committed_bytes", take);
  if (cfg_.check_discipline && hash_rx(f.rx) != guard)
    ++discipline_violations_;
}

void TcpStack::tx_cycle(uint64_t cycle, std::vector<TcpAction>& out) {
  roll_snapshots(cycle);
  for (auto& [k, f] : flows_) {
    if (f.rx.state == ConnState::Closed) continue;
    Emitter em{f, cfg_, counters_, out};
    uint64_t guard = cfg_.check_discipline ? hash_rx(f.rx) : 0;
    tx_step_flow(f.tx, f.rx_snap, f.iss, cfg_, cycle, em);
    if (cfg_.check_discipline && hash_rx(f.rx) != guard)
      ++discipline_violations_;
  }
}

const TcpStack::Flow* TcpStack::flow(const FlowKey& key) const {
  auto it = flows_.find(key);
  return it == flows_.end() ? nullptr : &it->second;
}

std::vector<uint8_t> TcpStack::rx_ring_peek(const FlowKey& key,
                                            uint64_t nbytes) const {
  auto it = flows_.find(key);
  if (it == flows_.end()) return {};
  const StreamRing& r = it->second.rx.ring;
  size_t n = size_t(std::min<uint64_t>(nbytes, r.size()));
  return r.slice(r.head(), n);
}

uint64_t TcpStack::counter(const std::string& name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

}  // namespace meshstack::tcp
