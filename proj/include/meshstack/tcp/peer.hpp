#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "meshstack/proto/tcp.hpp"
#include "meshstack/tcp/engine.hpp"

namespace meshstack::tcp {

// Counterpart endpoint for exercising the split server stack: an active
// opener with a reliable go-back-front sender (fast retransmit on the third
// duplicate ACK plus a coarse timer) and a strictly in-order receiver that
// ACKs every data segment — the duplicate ACKs it produces on gaps are what
// drive the server's fast-retransmit path. Single flow, monolithic state;
// this is harness machinery, not the split engine under test.
class TcpPeerModel {
 public:
  struct Config {
    uint32_t local_ip = 0x0A000001;
    uint32_t remote_ip = 0x0A000002;
    uint16_t local_port = 40000;
    uint16_t remote_port = 9000;
    uint32_t isn = 1000;
    size_t mss = 1460;
    size_t rx_window = 0xFFFF;  // fixed advertisement
    uint64_t rto = 900;         // cycles
    uint64_t syn_retry = 400;   // SYN retransmission interval
    int dupack_threshold = 3;
    int segs_per_step = 1;
  };

  explicit TcpPeerModel(Config cfg) : cfg_(cfg) {}

  // Queue application bytes for transmission (appendable).
  void send_stream(const std::vector<uint8_t>& bytes);

  // Feed one segment from the network; replies are appended to out.
  void on_segment(const proto::TcpSegment& seg, uint64_t cycle,
                  std::vector<proto::TcpSegment>& out);
  // Once per cycle: handshake, retransmissions, new data.
  void step(uint64_t cycle, std::vector<proto::TcpSegment>& out);

  bool established() const { return state_ == State::Established; }
  bool stream_acked() const {
    return established() && una_ == outbound_.size();
  }
  const std::vector<uint8_t>& received() const { return received_; }
  uint64_t counter(const std::string& name) const;
  const std::map<std::string, uint64_t>& counters() const { return counters_; }

 private:
  enum class State { Closed, SynSent, Established };

  proto::TcpSegment base_segment() const;
  void emit_data(uint64_t off, size_t len, std::vector<proto::TcpSegment>& out);
  void count(const std::string& n, uint64_t add = 1) { counters_[n] += add; }

  Config cfg_;
  State state_ = State::Closed;
  uint64_t syn_deadline_ = 0;

  // Sender half.
  std::vector<uint8_t> outbound_;
  uint64_t una_ = 0;
  uint64_t nxt_ = 0;
  uint32_t dup_count_ = 0;
  bool rtx_pending_ = false;
  uint8_t rtx_cause_ = 0;
  bool rtx_fired_valid_ = false;
  uint64_t rtx_fired_at_ = 0;
  uint64_t rto_deadline_ = 0;
  uint32_t peer_window_ = 0;

  // Receiver half.
  uint32_t irs_ = 0;
  uint64_t rcv_off_ = 0;
  std::vector<uint8_t> received_;

  std::map<std::string, uint64_t> counters_;
};

}  // namespace meshstack::tcp
