#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "meshstack/proto/eth.hpp"
#include "meshstack/sim/wire.hpp"
#include "meshstack/tcp/engine.hpp"
#include "meshstack/tcp/peer.hpp"

namespace meshstack::tcp {

// Seeded segment-level fault model for one direction of a connection:
// random drop / duplication / reordering-by-extra-delay, plus an optional
// one-shot forced drop of the nth data-bearing segment — the knob used to
// plant an isolated mid-stream loss.
struct FaultPlan {
  double drop_p = 0.0;
  double dup_p = 0.0;
  double reorder_p = 0.0;
  uint64_t reorder_delay = 37;
  uint64_t base_delay = 3;
  uint64_t drop_nth_data = 0;  // 1-based count of payload segments; 0 = off
};

class LossyChannel {
 public:
  LossyChannel(FaultPlan plan, uint64_t seed) : plan_(plan), rng_(seed) {}

  void push(proto::TcpSegment seg, uint64_t cycle);
  std::vector<proto::TcpSegment> deliver(uint64_t cycle);
  bool idle() const { return q_.empty(); }

  uint64_t pushed = 0;
  uint64_t dropped = 0;
  uint64_t forced_drops = 0;
  uint64_t duplicated = 0;
  uint64_t reordered = 0;

 private:
  FaultPlan plan_;
  std::mt19937_64 rng_;
  std::multimap<uint64_t, proto::TcpSegment> q_;
  uint64_t data_seen_ = 0;
};

// One seeded client↔server byte-streaming run at the engine-pair level (no
// mesh): the split server stack against the peer model across two lossy
// channels, the server application driven through the notification protocol
// (request/ready/done on rx, reserve/space/commit on tx).
struct StreamRunConfig {
  uint64_t seed = 1;
  size_t bytes_to_server = 0;
  size_t bytes_to_client = 0;
  FaultPlan to_server;
  FaultPlan to_client;
  uint64_t max_cycles = 4'000'000;
  size_t app_chunk = 4096;  // server app request/reserve granularity
  TcpStack::Config server;        // listen_ports/ips defaulted if empty
  TcpPeerModel::Config client;
};

struct StreamRunResult {
  bool ok = false;
  std::string err;
  uint64_t cycles = 0;
  bool to_server_exact = false;
  bool to_client_exact = false;
  bool acks_monotone = true;
  uint64_t discipline_violations = 0;
  uint64_t to_server_drops = 0;
  uint64_t to_client_drops = 0;
  std::map<std::string, uint64_t> server_counters;
  std::map<std::string, uint64_t> client_counters;
};

StreamRunResult run_stream_pair(const StreamRunConfig& cfg);

// Wire-level client: wraps the peer model in Ethernet/IPv4 framing on a
// simulated wire, for full-mesh runs against tcp tiles.
class TcpWireClient {
 public:
  struct Config {
    TcpPeerModel::Config peer;
    proto::MacAddr client_mac{{0x02, 0, 0, 0, 0, 0x01}};
    proto::MacAddr stack_mac{{0x02, 0, 0, 0, 0, 0x02}};
  };

  TcpWireClient(Config cfg, sim::WireModel* tx);

  // Attach as the engine's wire-out sink.
  void on_wire_word(uint64_t cycle, const std::vector<uint8_t>& frame,
                    size_t word_index, size_t word_count);
  void step(uint64_t cycle);

  TcpPeerModel& peer() { return peer_; }
  uint64_t parse_errors = 0;

 private:
  void send_segments(std::vector<proto::TcpSegment>& segs);

  Config cfg_;
  TcpPeerModel peer_;
  sim::WireModel* tx_;
  uint16_t next_ident_ = 1;
};

}  // namespace meshstack::tcp
