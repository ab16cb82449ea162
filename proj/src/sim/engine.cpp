#include "meshstack/sim/engine.hpp"

#include <cstdlib>
#include <functional>

#include "meshstack/sim/tiles.hpp"

namespace meshstack::sim {

namespace {

uint32_t coord_key(noc::Coord c) { return uint32_t(c.x) << 8 | c.y; }

int decl_param_int(const topo::TileDecl& t, const char* key, int fallback) {
  auto it = t.params.find(key);
  if (it == t.params.end()) return fallback;
  return int(std::strtol(it->second.c_str(), nullptr, 0));
}

}  // namespace

Result<std::unique_ptr<Engine>> Engine::build(topo::TopologyConfig cfg,
                                              Options opt,
                                              const FactoryMap& extra) {
  using R = Result<std::unique_ptr<Engine>>;
  auto eng = std::unique_ptr<Engine>(new Engine);
  eng->cfg_ = std::move(cfg);
  const auto& c = eng->cfg_;

  noc::Mesh::Config mc;
  mc.width = c.width;
  mc.height = c.height;
  mc.fifo_depth = c.fifo_depth;
  mc.pipeline_depth = c.pipeline_depth;
  eng->data_ = std::make_unique<noc::Mesh>(mc);
  if (c.control_noc) eng->ctrl_ = std::make_unique<noc::Mesh>(mc);

  auto resolve = [&c](const std::string& n) -> std::optional<noc::Coord> {
    const topo::TileDecl* d = c.tile(n);
    if (!d) return std::nullopt;
    return d->coord();
  };

  for (const auto& t : c.tiles) {
    if (t.kind == topo::TileKind::Empty) continue;
    uint64_t tile_seed = opt.seed ^ std::hash<std::string>{}(t.name);
    auto table = proto::NextHopTable::compile(t.routes, resolve, tile_seed);
    if (!table.ok())
      return R::failure("tile '" + t.name + "': " + table.err);

    TileEnv env;
    env.name = t.name;
    env.at = t.coord();
    env.decl = &t;
    env.cfg = &eng->cfg_;
    env.table = std::move(*table);
    env.seed = tile_seed;

    std::unique_ptr<TileLogic> logic;
    if (auto it = extra.find(t.kind); it != extra.end())
      logic = it->second(std::move(env));
    else
      logic = make_builtin_tile(t.kind, std::move(env));
    if (!logic)
      return R::failure("tile '" + t.name + "': no implementation for kind '" +
                        std::string(topo::to_string(t.kind)) + "'");

    Node::Config nc;
    nc.latency = uint64_t(t.latency);
    nc.store_and_forward = t.buffering == topo::Buffering::StoreAndForward;
    // Dispatch decisions cost one idle cycle per message unless overridden.
    int def_recovery = t.kind == topo::TileKind::Scheduler ? 1 : 0;
    nc.recovery = uint64_t(decl_param_int(t, "recovery", def_recovery));
    nc.out_gate = decl_param_int(t, "out_gate", 4);
    // Store-and-forward tiles carry message memory sized for the workload;
    // streaming tiles expose wormhole backpressure almost immediately.
    nc.out_msgs = decl_param_int(t, "out_msgs",
                                 nc.store_and_forward ? 256 : 4);
    nc.rx_queue = decl_param_int(t, "rx_queue", 4);

    auto node = std::make_unique<Node>(nc, std::move(logic), eng->data_.get(),
                                       eng->ctrl_.get(), &eng->next_id_);
    Node* raw = node.get();

    if (auto it = t.params.find("wire_in"); it != t.params.end()) {
      auto& w = eng->wires_in_[it->second];
      if (w)
        return R::failure("wire port '" + it->second + "' attached twice");
      w = std::make_unique<WireModel>();
      w->on_word([raw](uint64_t cy, const std::vector<uint8_t>& f, size_t wi,
                       size_t wc) { raw->on_wire_word(cy, f, wi, wc); });
    }
    if (auto it = t.params.find("wire_out"); it != t.params.end()) {
      std::string port = it->second;
      Engine* e = eng.get();
      raw->set_wire_sink([e, port](uint64_t cy, const std::vector<uint8_t>& f,
                                   size_t wi, size_t wc) {
        auto sit = e->wire_outs_.find(port);
        if (sit != e->wire_outs_.end() && sit->second)
          sit->second(cy, f, wi, wc);
      });
    }

    eng->by_name_[t.name] = eng->nodes_.size();
    eng->by_coord_[coord_key(t.coord())] = eng->nodes_.size();
    eng->nodes_.push_back(std::move(node));
  }
  return R::success(std::move(eng));
}

void Engine::step() {
  for (auto& [name, w] : wires_in_) w->advance(cycle_);
  for (auto& n : nodes_) n->tick(cycle_);
  for (auto& n : nodes_) n->ingest(cycle_);
  for (auto& n : nodes_) n->emit(cycle_);
  data_->advance();
  if (ctrl_) ctrl_->advance();

  uint64_t w = 0;
  for (auto& n : nodes_) w += n->work();
  for (auto& [name, wm] : wires_in_)
    w += wm->frames_queued + wm->frames_delivered;
  bool moved = data_->moved_last_cycle() || (ctrl_ && ctrl_->moved_last_cycle());
  if (w != last_work_ || moved) last_progress_ = cycle_;
  last_work_ = w;
  ++cycle_;
}

void Engine::run(uint64_t cycles) {
  for (uint64_t i = 0; i < cycles; ++i) step();
}

bool Engine::run_until_quiet(uint64_t limit, uint64_t quiet) {
  while (cycle_ < limit) {
    step();
    if (cycles_since_progress() > quiet) return true;
  }
  return false;
}

bool Engine::any_busy() const {
  for (const auto& n : nodes_)
    if (n->busy()) return true;
  for (const auto& [name, w] : wires_in_)
    if (!w->idle()) return true;
  return false;
}

bool Engine::wedged() const {
  return any_busy() || data_->in_flight_flits() > 0 ||
         (ctrl_ && ctrl_->in_flight_flits() > 0);
}

Node* Engine::node(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : nodes_[it->second].get();
}

Node* Engine::node_at(noc::Coord c) {
  auto it = by_coord_.find(coord_key(c));
  return it == by_coord_.end() ? nullptr : nodes_[it->second].get();
}

WireModel* Engine::wire_in(const std::string& port) {
  auto it = wires_in_.find(port);
  return it == wires_in_.end() ? nullptr : it->second.get();
}

void Engine::set_wire_out(const std::string& port, Node::WireSink sink) {
  wire_outs_[port] = std::move(sink);
}

std::vector<std::string> Engine::tile_names() const {
  std::vector<std::string> out;
  out.reserve(by_name_.size());
  for (const auto& [name, idx] : by_name_) out.push_back(name);
  return out;
}

}  // namespace meshstack::sim
