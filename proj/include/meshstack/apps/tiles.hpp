#pragma once

#include "meshstack/apps/rs.hpp"
#include "meshstack/apps/witness.hpp"
#include "meshstack/sim/engine.hpp"
#include "meshstack/sim/tile.hpp"

namespace meshstack::apps {

// Reed-Solomon encoder tile. Requests arrive as UDP payloads of
// 4-byte request id + 8*B data bytes; the reply carries the id + 2*B
// parity bytes back to the requester. Encoding is modeled at
// `bytes_per_cycle` (default 8) of input data: the reply waits that long
// after the tail and the tile stays busy so requests cannot overlap.
class RsEncodeLogic : public sim::TileLogic {
 public:
  using sim::TileLogic::TileLogic;
  std::vector<sim::OutMessage> on_message(const noc::NocMessage& in,
                                          uint64_t cycle) override;
};

// One replication-witness shard behind a UDP port.
class WitnessLogic : public sim::TileLogic {
 public:
  explicit WitnessLogic(sim::TileEnv env);
  std::vector<sim::OutMessage> on_message(const noc::NocMessage& in,
                                          uint64_t cycle) override;

  const WitnessState& state() const { return state_; }

 private:
  WitnessState state_;
};

// Registers factories for the tile kinds this module provides
// (rs_encode, witness).
void register_app_tiles(sim::Engine::FactoryMap& map);

}  // namespace meshstack::apps
