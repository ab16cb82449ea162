#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "meshstack/noc/message.hpp"
#include "meshstack/proto/meta.hpp"
#include "meshstack/proto/route_table.hpp"
#include "meshstack/topo/config.hpp"

namespace meshstack::sim {

// One message a tile wants to emit, plus how its flits may be released
// relative to the arrival of the input flits it was computed from.
struct OutMessage {
  noc::NocMessage msg;
  // Output unit j may leave once input unit clamp(j + lead, parse_index,
  // last) has arrived and the tile latency has elapsed. lead +1 suits
  // header-stripping tiles (output bytes sit one input flit later), 0
  // prepending ones, -1 wire-to-mesh ingress, +2 mesh-to-wire egress.
  int lead = 0;
  bool after_tail = false;     // every unit waits for the input tail
  uint64_t extra_latency = 0;  // compute cost beyond the tile's base latency
  uint64_t extra_busy = 0;     // port stays busy this long after the tail
  bool to_wire = false;        // serialize onto the external wire as words
  bool on_control = false;     // inject on the control-plane mesh
};

struct TileEnv {
  std::string name;
  noc::Coord at{};
  const topo::TileDecl* decl = nullptr;
  const topo::TopologyConfig* cfg = nullptr;
  proto::NextHopTable table;
  uint64_t seed = 0;
};

// Pure protocol behavior of one tile. Handlers run at the parse point of
// each input message with the whole message visible; the surrounding node
// keeps per-flit timing honest around the call.
class TileLogic {
 public:
  explicit TileLogic(TileEnv env) : env_(std::move(env)) {}
  virtual ~TileLogic() = default;

  virtual std::vector<OutMessage> on_message(const noc::NocMessage& in,
                                             uint64_t cycle) = 0;
  virtual std::vector<OutMessage> on_wire_frame(
      const std::vector<uint8_t>& frame, uint64_t cycle);
  virtual std::vector<OutMessage> on_tick(uint64_t cycle);

  const std::string& name() const { return env_.name; }
  noc::Coord at() const { return env_.at; }
  const std::string* param(const std::string& key) const;
  int param_int(const std::string& key, int fallback) const;
  std::string param_str(const std::string& key, const std::string& fallback) const;

  std::map<std::string, uint64_t> counters;
  void count(const std::string& key, uint64_t n = 1) { counters[key] += n; }

  // Wired by the owning node: how many output messages it still holds.
  // Lets self-paced logic (generators, read services) bound its queue.
  void set_out_depth_fn(std::function<size_t()> fn) { out_depth_fn_ = std::move(fn); }

 protected:
  size_t out_depth() const { return out_depth_fn_ ? out_depth_fn_() : 0; }

  // Table lookup that counts misses as drops.
  std::optional<proto::NextHop> route(const proto::PacketMeta& m);
  std::optional<noc::Coord> tile_coord(const std::string& name) const;

  TileEnv env_;
  std::function<size_t()> out_depth_fn_;
};

// Assembles a data-plane message carrying one metadata flit.
noc::NocMessage data_message(noc::Coord dst, const proto::PacketMeta& meta,
                             std::vector<uint8_t> payload);

}  // namespace meshstack::sim
