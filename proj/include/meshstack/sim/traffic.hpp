#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "meshstack/proto/eth.hpp"
#include "meshstack/sim/wire.hpp"

namespace meshstack::sim {

// UDP echo traffic endpoint at the far end of a wire port. Sends
// Eth/IPv4/UDP requests carrying a sequence number plus seeded random
// filler, and validates each reflected frame bit for bit.
class EchoClient {
 public:
  struct Config {
    uint64_t seed = 1;
    size_t payload_len = 64;  // >= 8; the first 8 bytes carry the sequence
    int window = 4;           // closed-loop requests in flight
    uint64_t interval = 0;    // > 0: open loop, one frame per interval
    uint64_t total = 0;       // stop after this many sends (0: unlimited)
    uint64_t start_cycle = 0;
    proto::MacAddr client_mac{{0x02, 0, 0, 0, 0, 0x01}};
    proto::MacAddr stack_mac{{0x02, 0, 0, 0, 0, 0x02}};
    uint32_t client_ip = 0x0A000001;  // 10.0.0.1
    uint32_t stack_ip = 0x0A000002;   // 10.0.0.2
    uint16_t client_port = 40000;
    uint16_t server_port = 7000;
  };

  EchoClient(Config cfg, WireModel* tx);

  // Attach as the engine's wire-out sink for the port.
  void on_wire_word(uint64_t cycle, const std::vector<uint8_t>& frame,
                    size_t word_index, size_t word_count);
  // Drive once per cycle, before the engine steps.
  void step(uint64_t cycle);

  bool done() const { return cfg_.total != 0 && received >= cfg_.total; }
  size_t in_flight() const { return inflight_.size(); }

  uint64_t sent = 0;
  uint64_t received = 0;
  uint64_t payload_mismatches = 0;
  uint64_t parse_errors = 0;
  uint64_t bytes_echoed = 0;  // payload bytes over valid echoes
  uint64_t first_send_cycle = 0;
  uint64_t last_recv_cycle = 0;
  std::vector<uint64_t> latencies;

 private:
  void send_one(uint64_t cycle);

  Config cfg_;
  WireModel* tx_;
  std::mt19937_64 rng_;
  // seq -> (send cycle, payload bytes we expect back)
  std::map<uint64_t, std::pair<uint64_t, std::vector<uint8_t>>> inflight_;
  uint64_t next_seq_ = 0;
};

// Frame-level fault injector for a wire: drops a frame with probability
// drop_p, else flips one random bit with probability corrupt_p.
WireModel::FaultFn make_random_faults(uint64_t seed, double drop_p,
                                      double corrupt_p);

// Raw UDP endpoint for application protocols that are not echo-shaped:
// sends caller-supplied payloads and hands back verified reply payloads.
class UdpRequester {
 public:
  struct Config {
    proto::MacAddr client_mac{{0x02, 0, 0, 0, 0, 0x01}};
    proto::MacAddr stack_mac{{0x02, 0, 0, 0, 0, 0x02}};
    uint32_t client_ip = 0x0A000001;
    uint32_t stack_ip = 0x0A000002;
    uint16_t client_port = 40000;
  };

  struct Reply {
    uint64_t cycle = 0;
    uint16_t src_port = 0;  // the service that answered
    std::vector<uint8_t> payload;
  };

  UdpRequester(Config cfg, WireModel* tx) : cfg_(cfg), tx_(tx) {}

  void send(uint16_t dst_port, std::vector<uint8_t> payload);
  void on_wire_word(uint64_t cycle, const std::vector<uint8_t>& frame,
                    size_t word_index, size_t word_count);

  uint64_t sent = 0;
  uint64_t parse_errors = 0;
  std::vector<Reply> replies;

 private:
  Config cfg_;
  WireModel* tx_;
  uint16_t next_ip_id_ = 1;
};

}  // namespace meshstack::sim
