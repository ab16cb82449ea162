#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "meshstack/proto/eth.hpp"
#include "meshstack/proto/meta.hpp"
#include "meshstack/sim/tile.hpp"

namespace meshstack::sim {

// Best-effort header sniff of a raw frame: fills in whatever L2/L3/L4 fields
// are readable without validating checksums or lengths. Used by wire-facing
// schedulers that must classify frames they do not terminate.
proto::PacketMeta sniff_frame(const std::vector<uint8_t>& frame);

// Wraps a raw frame as a mesh message with empty metadata. The payload is
// the frame bytes verbatim; parse happens wherever the frame is terminated.
noc::NocMessage raw_message(noc::Coord dst, std::vector<uint8_t> frame);

// One captured message in a logger tile's ring.
struct LogRecord {
  uint32_t seq = 0;
  uint64_t cycle = 0;
  noc::Coord src{};
  uint8_t msg_type = 0;
  bool control = false;
  std::vector<uint8_t> metadata;
  std::vector<uint8_t> payload;
};

void append_log_record(std::vector<uint8_t>& out, const LogRecord& r);
Result<std::vector<LogRecord>> parse_log_records(const std::vector<uint8_t>& bytes);

// --- protocol tiles ---------------------------------------------------------

// Terminates a wire: parses Ethernet, classifies by ethertype, forwards the
// L2 payload inward. Also accepts raw frames delivered over the mesh by a
// wire-facing scheduler.
class EthRxLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_wire_frame(const std::vector<uint8_t>& frame,
                                        uint64_t cycle) override;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;

 private:
  std::vector<OutMessage> handle_frame(const std::vector<uint8_t>& frame, int lead);
};

// Rebuilds the Ethernet header from metadata and serializes the frame out
// the attached wire.
class EthTxLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

class IpRxLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

class IpTxLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;

 private:
  uint16_t next_ident_ = 1;
};

class UdpRxLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

// Builds the UDP header. When the metadata carries a payload fold the header
// checksum is emitted before the payload has streamed in (cut-through);
// otherwise the tile waits for the tail and walks the bytes.
class UdpTxLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

// Application endpoint: reflects each payload back to its sender with the
// address fields swapped.
class EchoLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

// Work distributor. Classifies by next-hop table (round_robin / flow_hash
// policies do the spreading) and forwards otherwise untouched. Attached to a
// wire it wraps frames as raw mesh messages. The per-message recovery cost
// of the dispatch decision is modeled by the node's `recovery` setting.
class SchedulerLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_wire_frame(const std::vector<uint8_t>& frame,
                                        uint64_t cycle) override;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

// Utility tile: forwards to `next`, or by table, or sinks and counts.
// With gen_* params it is also a traffic source.
//   gen_dst    destination tile name
//   gen_len    payload bytes per message (>= 8; first 8 carry a sequence)
//   gen_every  emission period in cycles (0 = as fast as backpressure allows)
//   gen_count  messages to emit (0 = unlimited)
//   gen_start  first emission cycle
class RelayLogic : public TileLogic {
 public:
  explicit RelayLogic(TileEnv env);
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
  std::vector<OutMessage> on_tick(uint64_t cycle) override;

 private:
  std::optional<noc::Coord> next_;
  std::optional<noc::Coord> gen_dst_;
  uint64_t gen_len_ = 64;
  uint64_t gen_every_ = 0;
  uint64_t gen_count_ = 0;
  uint64_t gen_start_ = 0;
  uint64_t emitted_ = 0;
  std::mt19937_64 rng_;
};

// Address translator. `map` lists vip>backend pairs; traffic addressed to a
// vip is rewritten toward its backend (and the reverse direction restores
// the vip as source). The map is updated at runtime by generation-checked
// control-plane messages.
class NatLogic : public TileLogic {
 public:
  explicit NatLogic(TileEnv env);
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;

  uint32_t generation() const { return generation_; }
  const std::map<uint32_t, uint32_t>& mappings() const { return vip_to_backend_; }

 private:
  std::vector<OutMessage> handle_control(const noc::NocMessage& in);

  std::map<uint32_t, uint32_t> vip_to_backend_;
  std::map<uint32_t, uint32_t> backend_to_vip_;
  std::optional<noc::Coord> inbound_next_;
  std::optional<noc::Coord> outbound_next_;
  uint32_t generation_ = 0;
};

// Wraps the payload (an IP packet) in an outer IP header, protocol 4.
class IpEncapLogic : public TileLogic {
 public:
  explicit IpEncapLogic(TileEnv env);
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;

 private:
  uint32_t tunnel_src_ = 0;
  uint32_t tunnel_dst_ = 0;
  uint16_t next_ident_ = 1;
};

// Removes the outer IP header of a protocol-4 tunnel packet.
class IpDecapLogic : public TileLogic {
 public:
  using TileLogic::TileLogic;
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;
};

// Byte-addressable scratch memory behind write/read request messages. The
// store wraps modulo its capacity.
class BufferLogic : public TileLogic {
 public:
  explicit BufferLogic(TileEnv env);
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;

  const std::vector<uint8_t>& storage() const { return store_; }

 private:
  std::vector<uint8_t> store_;
};

// Captures every message it receives into a bounded ring and serves
// readback requests. When its output queue is congested, a readback request
// is dropped silently rather than wedging the capture path.
class LoggerLogic : public TileLogic {
 public:
  explicit LoggerLogic(TileEnv env);
  std::vector<OutMessage> on_message(const noc::NocMessage& in, uint64_t cycle) override;

  const std::deque<LogRecord>& ring() const { return ring_; }
  uint32_t next_seq() const { return seq_; }

 private:
  std::deque<LogRecord> ring_;
  size_t depth_ = 4096;
  uint32_t seq_ = 0;
};

// Instantiates the tile kinds implemented in this module; returns null for
// kinds provided elsewhere (tcp, coding, control endpoints).
std::unique_ptr<TileLogic> make_builtin_tile(topo::TileKind kind, TileEnv env);

}  // namespace meshstack::sim
