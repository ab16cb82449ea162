#include "meshstack/tcp/peer.hpp"

#include <algorithm>

namespace meshstack::tcp {

using proto::TcpSegment;

void TcpPeerModel::send_stream(const std::vector<uint8_t>& bytes) {
  outbound_.insert(outbound_.end(), bytes.begin(), bytes.end());
}

uint64_t TcpPeerModel::counter(const std::string& name) const {
  auto it = counters_.find(name);
  return it == counters_.end() ? 0 : it->second;
}

TcpSegment TcpPeerModel::base_segment() const {
  TcpSegment s;
  s.src_port = cfg_.local_port;
  s.dst_port = cfg_.remote_port;
  s.window = uint16_t(std::min<size_t>(cfg_.rx_window, 0xFFFF));
  return s;
}

void TcpPeerModel::emit_data(uint64_t off, size_t len,
                             std::vector<TcpSegment>& out) {
  TcpSegment s = base_segment();
  s.flags = proto::kTcpAck | proto::kTcpPsh;
  s.seq = cfg_.isn + 1 + uint32_t(off);
  s.ack = irs_ + 1 + uint32_t(rcv_off_);
  s.payload.assign(outbound_.begin() + long(off),
                   outbound_.begin() + long(off + len));
  out.push_back(std::move(s));
}

void TcpPeerModel::on_segment(const TcpSegment& seg, uint64_t cycle,
                              std::vector<TcpSegment>& out) {
  count("segments_in");
  if (seg.flags & proto::kTcpRst) {
    state_ = State::Closed;
    count("rst_rcvd");
    return;
  }

  if (state_ == State::SynSent) {
    if ((seg.flags & proto::kTcpSyn) && (seg.flags & proto::kTcpAck) &&
        seg.ack == cfg_.isn + 1) {
      irs_ = seg.seq;
      rcv_off_ = 0;
      peer_window_ = seg.window;
      state_ = State::Established;
      una_ = nxt_ = 0;
      count("established");
      TcpSegment a = base_segment();
      a.flags = proto::kTcpAck;
      a.seq = cfg_.isn + 1;
      a.ack = irs_ + 1;
      out.push_back(std::move(a));
    }
    return;
  }
  if (state_ != State::Established) return;

  // A retransmitted SYN-ACK means our handshake ACK was lost.
  if (seg.flags & proto::kTcpSyn) {
    TcpSegment a = base_segment();
    a.flags = proto::kTcpAck;
    a.seq = cfg_.isn + 1 + uint32_t(nxt_);
    a.ack = irs_ + 1 + uint32_t(rcv_off_);
    out.push_back(std::move(a));
    count("handshake_reacks");
    return;
  }

  peer_window_ = seg.window;
  if (seg.flags & proto::kTcpAck) {
    uint64_t a = unwrap_near(una_, seg.ack - (cfg_.isn + 1));
    if (a > una_ && a <= nxt_) {
      una_ = a;
      dup_count_ = 0;
      rtx_fired_valid_ = false;
      rtx_pending_ = false;
      rto_deadline_ = una_ < nxt_ ? cycle + cfg_.rto : 0;
    } else if (a == una_ && seg.payload.empty() &&
               !(seg.flags & proto::kTcpFin) && nxt_ > una_) {
      ++dup_count_;
      count("dup_acks");
      if (dup_count_ >= uint32_t(cfg_.dupack_threshold) && !rtx_pending_ &&
          !(rtx_fired_valid_ && rtx_fired_at_ == una_)) {
        rtx_pending_ = true;
        rtx_cause_ = 1;
      }
    }
  }

  bool want_ack = false;
  if (!seg.payload.empty()) {
    uint64_t s = unwrap_near(rcv_off_, seg.seq - (irs_ + 1));
    if (s == rcv_off_) {
      received_.insert(received_.end(), seg.payload.begin(),
                       seg.payload.end());
      rcv_off_ += seg.payload.size();
      counters_["rx_bytes"] += seg.payload.size();
    } else {
      count("out_of_order");
    }
    want_ack = true;
  }
  if (seg.flags & proto::kTcpFin) want_ack = true;

  if (want_ack) {
    TcpSegment a = base_segment();
    a.flags = proto::kTcpAck;
    a.seq = cfg_.isn + 1 + uint32_t(nxt_);
    a.ack = irs_ + 1 + uint32_t(rcv_off_);
    out.push_back(std::move(a));
  }
}

void TcpPeerModel::step(uint64_t cycle, std::vector<TcpSegment>& out) {
  if (state_ == State::Closed) {
    TcpSegment s = base_segment();
    s.flags = proto::kTcpSyn;
    s.seq = cfg_.isn;
    out.push_back(std::move(s));
    state_ = State::SynSent;
    syn_deadline_ = cycle + cfg_.syn_retry;
    count("syns");
    return;
  }
  if (state_ == State::SynSent) {
    if (cycle >= syn_deadline_) {
      TcpSegment s = base_segment();
      s.flags = proto::kTcpSyn;
      s.seq = cfg_.isn;
      out.push_back(std::move(s));
      syn_deadline_ = cycle + cfg_.syn_retry;
      count("syn_rtx");
    }
    return;
  }

  if (rto_deadline_ && cycle >= rto_deadline_ && una_ < nxt_) {
    rtx_pending_ = true;
    rtx_cause_ = 2;
    rtx_fired_valid_ = false;
    rto_deadline_ = cycle + cfg_.rto;
    count("rto_fires");
  }

  int budget = cfg_.segs_per_step;
  if (rtx_pending_ && budget > 0 && una_ < nxt_) {
    size_t len = size_t(std::min<uint64_t>(cfg_.mss, nxt_ - una_));
    emit_data(una_, len, out);
    count(rtx_cause_ == 1 ? "fast_retransmits" : "rto_retransmits");
    if (rtx_cause_ == 1) {
      rtx_fired_valid_ = true;
      rtx_fired_at_ = una_;
    }
    rtx_pending_ = false;
    rtx_cause_ = 0;
    rto_deadline_ = cycle + cfg_.rto;
    --budget;
  }
  while (budget > 0) {
    uint64_t avail = outbound_.size() - nxt_;
    uint64_t inflight = nxt_ - una_;
    uint64_t wnd = peer_window_ > inflight ? peer_window_ - inflight : 0;
    size_t len = size_t(std::min<uint64_t>({cfg_.mss, avail, wnd}));
    if (len == 0) break;
    emit_data(nxt_, len, out);
    nxt_ += len;
    if (!rto_deadline_) rto_deadline_ = cycle + cfg_.rto;
    counters_["tx_stream_bytes"] += len;
    --budget;
  }
}

}  // namespace meshstack::tcp
