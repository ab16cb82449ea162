#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "meshstack/noc/coord.hpp"
#include "meshstack/noc/message.hpp"

namespace meshstack::noc {

// One wormhole router. Five ports (N, E, S, W, Local), an input FIFO per
// port, and worm bookkeeping: an input that has routed a header keeps its
// output until the tail departs, and an output remembers which input owns it.
struct Router {
  Coord coord;
  std::array<std::deque<Flit>, kNumPorts> in_fifo;
  std::array<std::optional<uint8_t>, kNumPorts> in_route;   // output claimed by the worm at input i
  std::array<uint32_t, kNumPorts> in_remaining{};           // flits of that worm not yet forwarded
  std::array<std::optional<uint8_t>, kNumPorts> out_owner;  // input that owns output o
  std::deque<Flit> local_out;                               // ejection buffer drained by the tile
};

// Cycle-level mesh model.
//
// Semantics, fixed and relied on by the latency math elsewhere:
//  - advance() computes every move from start-of-cycle state, then commits,
//    so all routers act simultaneously. One flit per link per cycle.
//  - A header flit claims its output (per xy_route_next) the first cycle it
//    sits at the head of an input FIFO and the output is free; arbitration
//    between contending headers is fixed priority N > E > S > W > Local.
//    The claim persists while the worm is blocked; the output is released
//    when the tail flit departs.
//  - A move (including injection) stamps the flit with ready_cycle =
//    cycle + pipeline_depth; it may move again once that cycle is reached.
//    With the default depth of 1 a flit advances one hop per cycle.
//  - Backpressure only: a flit moves iff the downstream FIFO had room at the
//    start of the cycle. Nothing is ever dropped.
class Mesh {
 public:
  struct Config {
    int width = 1;
    int height = 1;
    int fifo_depth = 4;
    int pipeline_depth = 1;
  };

  // Called once per committed flit move. Ejections use Link{c, c}.
  using TraceFn = std::function<void(uint64_t cycle, const Link&, const Flit&)>;

  explicit Mesh(const Config& cfg);

  const Config& config() const { return cfg_; }
  uint64_t cycle() const { return cycle_; }

  // Tile-side interface. Injection pushes into the Local input FIFO; the
  // caller keeps to one flit per tile per cycle.
  bool can_inject(const Coord& c) const;
  void inject(const Coord& c, Flit f);
  size_t eject_size(const Coord& c) const;
  const Flit* eject_peek(const Coord& c) const;
  Flit eject_pop(const Coord& c);

  void advance();

  bool moved_last_cycle() const { return moved_last_cycle_; }
  uint64_t in_flight_flits() const;
  void set_trace(TraceFn fn) { trace_ = std::move(fn); }

  Router& router(const Coord& c) { return routers_[idx(c)]; }
  const Router& router(const Coord& c) const { return routers_[idx(c)]; }

 private:
  size_t idx(const Coord& c) const { return size_t(c.y) * cfg_.width + c.x; }
  bool in_bounds(const Coord& c) const { return c.x < cfg_.width && c.y < cfg_.height; }

  Config cfg_;
  uint64_t cycle_ = 0;
  bool moved_last_cycle_ = false;
  std::vector<Router> routers_;
  TraceFn trace_;
};

}  // namespace meshstack::noc
