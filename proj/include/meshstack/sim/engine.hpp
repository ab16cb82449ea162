#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "meshstack/noc/mesh.hpp"
#include "meshstack/sim/node.hpp"
#include "meshstack/sim/wire.hpp"
#include "meshstack/topo/config.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::sim {

// Builds and steps a whole design: one timed node per declared tile, a
// data-plane mesh, an optional control-plane mesh, and named external wire
// ports. Tiles declare attachments with the params `wire_in` / `wire_out`
// whose value names the port; test benches and traffic clients connect to
// those names.
class Engine {
 public:
  // Hook for tile kinds implemented outside the core module (transport
  // engines, coders, control endpoints): maps a kind to a constructor.
  using LogicFactory = std::function<std::unique_ptr<TileLogic>(TileEnv)>;
  using FactoryMap = std::map<topo::TileKind, LogicFactory>;

  struct Options {
    uint64_t seed = 1;
  };

  static Result<std::unique_ptr<Engine>> build(topo::TopologyConfig cfg,
                                               Options opt,
                                               const FactoryMap& extra = {});
  static Result<std::unique_ptr<Engine>> build(topo::TopologyConfig cfg) {
    return build(std::move(cfg), Options{});
  }

  // One simulated cycle: wires deliver, tiles tick, nodes drain inputs,
  // nodes release outputs, meshes move flits.
  void step();
  void run(uint64_t cycles);
  // Steps until nothing has made progress for `quiet` consecutive cycles,
  // or `limit` cycles elapse. Returns true if the design went quiet.
  bool run_until_quiet(uint64_t limit, uint64_t quiet);

  uint64_t cycle() const { return cycle_; }
  uint64_t cycles_since_progress() const { return cycle_ - last_progress_; }
  bool any_busy() const;
  // True when traffic is stranded: something is in flight or queued, yet
  // the design is quiet. Meaningful after run_until_quiet returned true.
  bool wedged() const;

  noc::Mesh& data_mesh() { return *data_; }
  noc::Mesh* ctrl_mesh() { return ctrl_.get(); }
  Node* node(const std::string& name);
  Node* node_at(noc::Coord c);
  WireModel* wire_in(const std::string& port);
  void set_wire_out(const std::string& port, Node::WireSink sink);
  const topo::TopologyConfig& config() const { return cfg_; }
  std::vector<std::string> tile_names() const;

  // All nodes, in declaration order (for metrics sweeps).
  const std::vector<std::unique_ptr<Node>>& nodes() const { return nodes_; }

 private:
  Engine() = default;

  topo::TopologyConfig cfg_;
  std::unique_ptr<noc::Mesh> data_;
  std::unique_ptr<noc::Mesh> ctrl_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<std::string, size_t> by_name_;
  std::map<uint32_t, size_t> by_coord_;
  std::map<std::string, std::unique_ptr<WireModel>> wires_in_;
  std::map<std::string, Node::WireSink> wire_outs_;
  uint64_t next_id_ = 1;
  uint64_t cycle_ = 0;
  uint64_t last_progress_ = 0;
  uint64_t last_work_ = 0;
};

}  // namespace meshstack::sim
