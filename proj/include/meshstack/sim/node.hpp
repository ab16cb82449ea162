#pragma once

#include <deque>
#include <functional>
#include <memory>

#include "meshstack/noc/mesh.hpp"
#include "meshstack/sim/tile.hpp"
#include "meshstack/sim/wire.hpp"

namespace meshstack::sim {

// Timing wrapper around a TileLogic. Drains the router ejection FIFO and
// the wire one unit per cycle, triggers the logic at each input message's
// parse point, and releases output flits on a schedule tied to the input
// arrival times — so a cut-through tile overlaps input and output exactly
// like a hardware pipeline, while a store-and-forward tile waits for the
// tail. A blocked output throttles input consumption, which fills the
// router's ejection FIFO and backpressures the mesh.
class Node {
 public:
  struct Config {
    uint64_t latency = 2;  // base cut-through latency, cycles
    int out_gate = 4;      // releasable-but-unsent flits that stall input
    int out_msgs = 4;      // whole queued messages that stall input
    uint64_t recovery = 0; // port idle cycles after each emitted message
    bool store_and_forward = false;
    int rx_queue = 4;      // queued output messages before wire ingress sheds
  };

  using WireSink = std::function<void(uint64_t cycle, const std::vector<uint8_t>& frame,
                                      size_t word_index, size_t word_count)>;

  Node(Config cfg, std::unique_ptr<TileLogic> logic, noc::Mesh* data_mesh,
       noc::Mesh* ctrl_mesh, uint64_t* next_message_id);

  void set_wire_sink(WireSink s) { wire_sink_ = std::move(s); }
  // Wire ingress; wired as a WireModel word callback.
  void on_wire_word(uint64_t cycle, const std::vector<uint8_t>& frame,
                    size_t word_index, size_t word_count);

  void tick(uint64_t cycle);    // spontaneous work (generators, timers)
  void ingest(uint64_t cycle);  // pop from the meshes, fire parse points
  void emit(uint64_t cycle);    // release scheduled flits into the meshes/wire

  bool busy() const;
  uint64_t work() const { return work_; }  // monotone progress counter
  size_t queued_out() const { return outq_.size(); }
  TileLogic& logic() { return *logic_; }
  const TileLogic& logic() const { return *logic_; }
  noc::Coord at() const { return logic_->at(); }

 private:
  enum Port { kPortData = 0, kPortCtrl = 1, kPortWire = 2, kPortCount = 3 };

  struct InStream {
    std::shared_ptr<std::vector<uint64_t>> arrivals;  // c(i), one per unit
    std::shared_ptr<const noc::NocMessage> msg;
    uint32_t expect = 0;
    uint64_t stall_until = 0;
    bool dropped = false;  // ingress shed this frame; ignore its words
  };

  struct PendingOut {
    int port = kPortData;
    std::vector<noc::Flit> flits;  // mesh ports
    std::vector<uint8_t> frame;    // wire port
    size_t units = 0;
    size_t next = 0;
    std::shared_ptr<const std::vector<uint64_t>> arrivals;  // null: generated
    size_t parse_index = 0;
    size_t last_index = 0;
    int lead = 0;
    bool after_tail = false;
    uint64_t latency = 0;  // base + extra
    uint64_t created = 0;  // dep time when there is no input stream
    uint64_t post_gap = 0; // port idle after the last unit (busy modeling)
  };

  void accept_flit(InStream& in, bool control, noc::Flit f, uint64_t cycle);
  size_t parse_index_of(const InStream& in, bool control) const;
  void schedule(std::vector<OutMessage> outs,
                std::shared_ptr<const std::vector<uint64_t>> arrivals,
                size_t parse_index, size_t last_index, uint64_t cycle);
  bool unit_releasable(const PendingOut& p, size_t unit, uint64_t cycle) const;
  size_t ready_backlog(uint64_t cycle) const;
  void pop_plane(noc::Mesh* mesh, InStream& in, bool control, uint64_t cycle);

  Config cfg_;
  std::unique_ptr<TileLogic> logic_;
  noc::Mesh* data_ = nullptr;
  noc::Mesh* ctrl_ = nullptr;
  uint64_t* next_id_ = nullptr;
  WireSink wire_sink_;
  InStream in_data_, in_ctrl_, in_wire_;
  std::deque<PendingOut> outq_;
  uint64_t port_free_[kPortCount] = {0, 0, 0};
  uint64_t work_ = 0;
};

}  // namespace meshstack::sim
