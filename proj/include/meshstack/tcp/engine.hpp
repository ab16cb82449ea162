#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/proto/tcp.hpp"

namespace meshstack::tcp {

using proto::ByteView;

// Server-side TCP stack split into a receive engine and a transmit engine
// with partitioned flow state, mirroring a two-tile hardware layout:
//
//   - rx-owned state (connection status, rcv_nxt, the latest cumulative ACK
//     seen for our data, duplicate-ACK count, peer window, receive ring) is
//     written only while the receive engine runs;
//   - tx-owned state (snd_una, snd_nxt, transmit ring, retransmit flag,
//     retransmission timer) is written only while the transmit engine runs;
//   - each engine reads the other half exclusively through a snapshot taken
//     at the previous cycle boundary, modeling the one-cycle propagation of
//     dedicated wires between the two tiles. Decisions made from a stale
//     snapshot are safe: they are the decisions a slightly earlier arrival
//     order would have produced.
//
// The canonical schedule runs the receive engine before the transmit engine
// within a cycle; because both only ever see boundary snapshots of the other
// half, any interleaving inside one cycle yields the same emissions.
//
// Segments emitted by the two engines merge onto one path to the IP tile.
// That merge point holds a latch of the last emitted ACK value per flow and
// never lets the field step backwards: the transmit engine stamps ACKs from
// its one-cycle-old snapshot, and without the latch a fresher pure ACK from
// the receive engine could be followed by a staler data segment.
//
// Scope: passive open only, cumulative ACKs (no SACK), fast retransmit on
// the third duplicate ACK, a coarse retransmission timeout for lost tails,
// window-based flow control, and minimal passive close (FIN acknowledged,
// half-close). No congestion control, window scaling, or timestamps.

// Monotonically-unwrapped sequence helpers: the wire carries 32-bit numbers,
// the engine tracks 64-bit stream offsets so wraparound never corrupts
// comparisons. unwrap_near picks the 64-bit value congruent to `wire`
// (mod 2^32) closest to `near`.
uint64_t unwrap_near(uint64_t near, uint32_t wire);

inline int64_t seq_diff(uint32_t a, uint32_t b) {
  return int64_t(int32_t(a - b));
}

enum class ConnState : uint8_t {
  Listen = 0,
  SynRcvd = 1,
  Established = 2,
  Closing = 3,  // peer's FIN acknowledged; half-closed
  Closed = 4,
};
const char* to_string(ConnState s);

struct FlowKey {
  uint32_t peer_ip = 0;
  uint16_t peer_port = 0;
  uint16_t local_port = 0;

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};
std::string to_string(const FlowKey& k);

// Byte ring addressed by absolute stream offsets. head is the offset of the
// first byte still stored, tail is one past the last.
class StreamRing {
 public:
  explicit StreamRing(size_t capacity) : data_(capacity) {}

  size_t capacity() const { return data_.size(); }
  uint64_t head() const { return head_; }
  uint64_t tail() const { return tail_; }
  size_t size() const { return size_t(tail_ - head_); }
  size_t free() const { return data_.size() - size(); }

  // Appends at tail; the caller has already clamped to free().
  void append(ByteView bytes);
  // Copies [off, off+n) into out; the range must be stored.
  void copy(uint64_t off, size_t n, uint8_t* out) const;
  std::vector<uint8_t> slice(uint64_t off, size_t n) const;
  void release(size_t n) { head_ += std::min<uint64_t>(n, size()); }

 private:
  std::vector<uint8_t> data_;
  uint64_t head_ = 0;
  uint64_t tail_ = 0;
};

// State half written only by the receive engine.
struct RxOwned {
  ConnState state = ConnState::Listen;
  uint32_t irs = 0;        // peer's initial sequence number
  uint64_t rcv_off = 0;    // stream bytes received in order (rcv_nxt - irs - 1)
  uint64_t ack_off = 0;    // cumulative peer ACK of our data, as stream offset
  uint32_t dup_ack_count = 0;
  uint32_t peer_window = 0;
  StreamRing ring;         // in-order bytes awaiting the application
  uint64_t rx_request = 0; // pending notify-at threshold (0: none)
  bool fin_received = false;

  explicit RxOwned(size_t cap) : ring(cap) {}
  uint32_t rcv_nxt() const { return irs + 1 + uint32_t(rcv_off) + (fin_received ? 1 : 0); }
};

// State half written only by the transmit engine.
struct TxOwned {
  bool inited = false;     // becomes true once the flow is established
  uint64_t una_off = 0;    // oldest unacknowledged stream offset
  uint64_t nxt_off = 0;    // next stream offset to send
  StreamRing ring;         // committed application bytes; head == acked bytes
  bool retransmit_pending = false;
  uint8_t rtx_cause = 0;       // 0: none, 1: duplicate ACKs, 2: timer
  bool rtx_fired_valid = false;
  uint64_t rtx_fired_at = 0;   // una_off level already fast-retransmitted
  uint64_t rto_deadline = 0;   // 0: unarmed
  uint64_t tx_reserve = 0;     // pending space-notify threshold (0: none)

  explicit TxOwned(size_t cap) : ring(cap) {}
};

// Point-in-time copy of the rx half, published at cycle boundaries. Wire
// values (rcv_nxt32) are precomputed so the reader never touches rx fields.
struct RxSnapshot {
  ConnState state = ConnState::Listen;
  uint32_t rcv_nxt32 = 0;   // ACK value for outgoing segments
  uint64_t ack_off = 0;     // cumulative peer ACK of our data, stream offset
  uint32_t dup_ack_count = 0;
  uint32_t peer_window = 0;
  uint32_t adv_window = 0;  // receive ring free space, clamped to 16 bits
};

struct TxSnapshot {
  bool inited = false;
  uint64_t una_off = 0;
  uint64_t nxt_off = 0;
  uint32_t snd_nxt32 = 0;   // sequence value for pure ACKs
};

struct AppNotification {
  enum class Kind : uint8_t {
    ConnEstablished = 1,
    RxReady = 2,
    TxSpace = 3,
    Reject = 4,
  };
  Kind kind = Kind::ConnEstablished;
  FlowKey flow;
  uint64_t addr = 0;  // ring offset of the first byte (RxReady / TxSpace)
  uint64_t len = 0;
};

struct TcpAction {
  enum class Kind : uint8_t { Segment, Notify };
  Kind kind = Kind::Segment;
  proto::TcpSegment seg;  // flow addressing below
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  AppNotification note;
};

class TcpStack {
 public:
  struct Config {
    uint64_t seed = 1;
    uint32_t local_ip = 0;
    std::vector<uint16_t> listen_ports;
    size_t mss = 1460;
    size_t ring_capacity = 64 * 1024;
    uint64_t rto = 5000;         // cycles
    int dupack_threshold = 3;
    int segs_per_cycle = 1;      // transmit engine emission budget
    std::optional<uint32_t> forced_iss;  // tests: pin the ISN
    bool check_discipline = true;
  };

  struct Flow {
    FlowKey key;
    uint32_t iss = 0;
    RxOwned rx;
    TxOwned tx;
    RxSnapshot rx_snap;  // what the tx engine sees this cycle
    TxSnapshot tx_snap;  // what the rx engine sees this cycle
    // Shared emission latch (the merge point onto the IP path); not part of
    // either owned half.
    bool last_ack_valid = false;
    uint32_t last_ack = 0;

    Flow(FlowKey k, size_t cap) : key(k), rx(cap), tx(cap) {}
  };

  explicit TcpStack(Config cfg);

  // --- receive engine ------------------------------------------------------
  // Feed one validated segment up from the IP layer.
  void rx_segment(uint32_t src_ip, uint32_t dst_ip, const proto::TcpSegment& seg,
                  uint64_t cycle, std::vector<TcpAction>& out);
  // Application asks to be notified once nbytes are contiguous in the ring.
  void app_rx_request(const FlowKey& key, uint64_t nbytes, uint64_t cycle,
                      std::vector<TcpAction>& out);
  // Application finished with nbytes; frees ring space and pushes a window
  // update so a sender stalled on a zero window can resume.
  void app_rx_done(const FlowKey& key, uint64_t nbytes, uint64_t cycle,
                   std::vector<TcpAction>& out);

  // --- transmit engine -------------------------------------------------------
  void app_tx_reserve(const FlowKey& key, uint64_t nbytes, uint64_t cycle,
                      std::vector<TcpAction>& out);
  // Append stream bytes (the application publishing into its reserved space).
  void app_tx_commit(const FlowKey& key, ByteView bytes, uint64_t cycle);
  // One transmit-engine step over all flows: absorb the snapshot's cumulative
  // ACK, fire fast retransmit / the timer, then send new data in MSS pieces
  // within the snapshot's window.
  void tx_cycle(uint64_t cycle, std::vector<TcpAction>& out);

  // --- inspection ------------------------------------------------------------
  const Flow* flow(const FlowKey& key) const;
  const std::map<FlowKey, Flow>& flows() const { return flows_; }
  std::vector<uint8_t> rx_ring_peek(const FlowKey& key, uint64_t nbytes) const;
  uint64_t counter(const std::string& name) const;
  const std::map<std::string, uint64_t>& counters() const { return counters_; }
  uint64_t discipline_violations() const { return discipline_violations_; }
  const Config& config() const { return cfg_; }
  uint32_t isn_for(const FlowKey& key) const;

 private:
  Flow& flow_for(const FlowKey& key);
  void roll_snapshots(uint64_t cycle);
  void count(const std::string& name, uint64_t add = 1) { counters_[name] += add; }
  // Discipline checker: hash the half the active engine must not touch.
  uint64_t hash_rx(const RxOwned& rx) const;
  uint64_t hash_tx(const TxOwned& tx) const;

  Config cfg_;
  std::map<FlowKey, Flow> flows_;
  std::map<std::string, uint64_t> counters_;
  uint64_t cur_cycle_ = ~uint64_t(0);
  uint64_t discipline_violations_ = 0;
};

}  // namespace meshstack::tcp
