#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "meshstack/sim/engine.hpp"
#include "meshstack/sim/tile.hpp"
#include "meshstack/tcp/engine.hpp"

namespace meshstack::tcp {

// The rx and tx tiles of one TCP stack are separate mesh tiles wrapping the
// two halves of one split engine. They find each other through this registry
// by their common `stack` param; one register_tcp_tiles call produces one
// registry, so stacks in one design never collide across designs.
struct TcpTileGroup {
  struct Entry {
    std::shared_ptr<TcpStack> stack;
    // Ethernet addressing learned from inbound frames, keyed by peer IP:
    // {peer mac, our mac}. Outbound segments are stamped from this.
    std::map<uint32_t, std::pair<proto::MacAddr, proto::MacAddr>> eth;
    // Receive-ring bytes already mirrored to the rx_buf tile, per flow.
    std::map<FlowKey, uint64_t> mirrored;
  };
  std::map<std::string, Entry> entries;

  // Creates the stack from this tile's params on first sight of its name.
  Entry& entry_for(const sim::TileLogic& tile);
};

// Tile params understood by both halves (the first tile seen builds the
// stack, so declare them consistently):
//   stack   registry key tying an rx/tx pair together (default "tcp")
//   ip      local IPv4 address, dotted quad (default 10.0.0.2)
//   ports   comma-separated listen ports (default 9000)
//   mss, ring, rto, budget, dupack   engine knobs
//   iss     pin the initial sequence number (tests)
//   next    tile that carries outbound segments down the stack (ip_tx)
// tcp_rx only:
//   rx_buf  buffer tile that mirrors every in-order received byte

// Terminates inbound segments (the receive engine) and serves the
// application's receive calls. Notifications route by dst_port through the
// tile's table; segments it emits (SYN-ACKs, ACKs) go to `next`.
class TcpRxLogic : public sim::TileLogic {
 public:
  TcpRxLogic(sim::TileEnv env, std::shared_ptr<TcpTileGroup> group);
  std::vector<sim::OutMessage> on_message(const noc::NocMessage& in,
                                          uint64_t cycle) override;

  TcpStack& stack() { return *entry_->stack; }

 private:
  std::shared_ptr<TcpTileGroup> group_;
  TcpTileGroup::Entry* entry_ = nullptr;
};

// Runs the transmit engine once per cycle and serves the application's
// send calls.
class TcpTxLogic : public sim::TileLogic {
 public:
  TcpTxLogic(sim::TileEnv env, std::shared_ptr<TcpTileGroup> group);
  std::vector<sim::OutMessage> on_message(const noc::NocMessage& in,
                                          uint64_t cycle) override;
  std::vector<sim::OutMessage> on_tick(uint64_t cycle) override;

  TcpStack& stack() { return *entry_->stack; }

 private:
  std::shared_ptr<TcpTileGroup> group_;
  TcpTileGroup::Entry* entry_ = nullptr;
};

// Installs factories for the tcp_rx / tcp_tx tile kinds sharing one registry.
void register_tcp_tiles(sim::Engine::FactoryMap& extra);

}  // namespace meshstack::tcp
