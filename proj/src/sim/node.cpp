#include "meshstack/sim/node.hpp"

#include <algorithm>
#include <cassert>

namespace meshstack::sim {

Node::Node(Config cfg, std::unique_ptr<TileLogic> logic, noc::Mesh* data_mesh,
           noc::Mesh* ctrl_mesh, uint64_t* next_message_id)
    : cfg_(cfg),
      logic_(std::move(logic)),
      data_(data_mesh),
      ctrl_(ctrl_mesh),
      next_id_(next_message_id) {
  logic_->set_out_depth_fn([this] { return outq_.size(); });
}

size_t Node::parse_index_of(const InStream& in, bool control) const {
  // Control messages and store-and-forward tiles act on whole messages;
  // streaming tiles act once the metadata flit (index 1) has arrived.
  if (control || cfg_.store_and_forward) return in.expect - 1;
  return std::min<size_t>(1, in.expect - 1);
}

void Node::accept_flit(InStream& in, bool control, noc::Flit f, uint64_t cycle) {
  ++work_;
  if (f.kind == noc::FlitKind::Header) {
    in.arrivals = std::make_shared<std::vector<uint64_t>>();
    in.msg = f.msg;
    in.expect = f.msg ? noc::total_flit_count(*f.msg) : 1;
    in.dropped = false;
  } else if (!in.msg) {
    logic_->count("stray_flit");
    return;
  }
  in.arrivals->push_back(cycle);
  size_t index = in.arrivals->size() - 1;
  if (in.msg && index == parse_index_of(in, control) && !in.dropped) {
    auto outs = logic_->on_message(*in.msg, cycle);
    schedule(std::move(outs), in.arrivals, index, in.expect - 1, cycle);
  }
  if (index + 1 >= in.expect) {
    if (cfg_.recovery) in.stall_until = cycle + 1 + cfg_.recovery;
    in.msg.reset();
    in.expect = 0;
  }
}

void Node::on_wire_word(uint64_t cycle, const std::vector<uint8_t>& frame,
                        size_t word_index, size_t word_count) {
  ++work_;
  if (word_index == 0) {
    in_wire_.arrivals = std::make_shared<std::vector<uint64_t>>();
    in_wire_.expect = uint32_t(word_count);
    in_wire_.dropped = outq_.size() >= size_t(cfg_.rx_queue);
    if (in_wire_.dropped) logic_->count("rx_overflow_drop");
  }
  if (!in_wire_.arrivals) return;
  in_wire_.arrivals->push_back(cycle);
  if (word_index == 0 && !in_wire_.dropped) {
    auto outs = logic_->on_wire_frame(frame, cycle);
    schedule(std::move(outs), in_wire_.arrivals, 0, word_count - 1, cycle);
  }
  if (word_index + 1 >= word_count) in_wire_.expect = 0;
}

void Node::schedule(std::vector<OutMessage> outs,
                    std::shared_ptr<const std::vector<uint64_t>> arrivals,
                    size_t parse_index, size_t last_index, uint64_t cycle) {
  for (auto& o : outs) {
    PendingOut p;
    p.latency = cfg_.latency + o.extra_latency;
    p.lead = o.lead;
    p.after_tail = o.after_tail || cfg_.store_and_forward;
    p.arrivals = arrivals;
    p.parse_index = parse_index;
    p.last_index = last_index;
    p.created = cycle;
    p.post_gap = cfg_.recovery + o.extra_busy;
    if (o.to_wire) {
      p.port = kPortWire;
      p.frame = std::move(o.msg.payload);
      p.units = wire_word_count(p.frame.size());
    } else {
      p.port = o.on_control ? kPortCtrl : kPortData;
      o.msg.src = at();
      o.msg.control = o.on_control;
      auto flits = noc::encode_message(o.msg, (*next_id_)++);
      if (!flits.ok()) {
        logic_->count("encode_error");
        continue;
      }
      p.flits = std::move(*flits);
      p.units = p.flits.size();
    }
    outq_.push_back(std::move(p));
  }
}

bool Node::unit_releasable(const PendingOut& p, size_t unit, uint64_t cycle) const {
  if (unit >= p.units) return false;
  uint64_t dep_time;
  if (!p.arrivals) {
    dep_time = p.created;
  } else {
    size_t dep;
    if (p.after_tail) {
      dep = p.last_index;
    } else {
      int64_t want = int64_t(unit) + p.lead;
      int64_t lo = int64_t(p.parse_index);
      int64_t hi = int64_t(p.last_index);
      dep = size_t(std::clamp(want, lo, hi));
    }
    if (dep >= p.arrivals->size()) return false;  // input not here yet
    dep_time = (*p.arrivals)[dep];
  }
  return cycle >= dep_time + p.latency;
}

size_t Node::ready_backlog(uint64_t cycle) const {
  size_t n = 0;
  for (const auto& p : outq_) {
    for (size_t u = p.next; u < p.units; ++u) {
      if (!unit_releasable(p, u, cycle)) break;
      if (++n >= size_t(cfg_.out_gate)) return n;
    }
  }
  return n;
}

void Node::pop_plane(noc::Mesh* mesh, InStream& in, bool control, uint64_t cycle) {
  if (!mesh) return;
  noc::Coord c = at();
  if (mesh->eject_size(c) == 0) return;
  if (cycle < in.stall_until) return;
  if (!control) {
    // Input throttle: a choked output must stop consumption so the mesh
    // sees backpressure. A store-and-forward tile's message memory decouples
    // its ingress from a stalled egress — it throttles only when that memory
    // fills — which is what lets it cut wormhole dependency spans. The
    // control plane stays isolated from data-plane congestion.
    if (!cfg_.store_and_forward &&
        ready_backlog(cycle) >= size_t(cfg_.out_gate))
      return;
    if (outq_.size() >= size_t(cfg_.out_msgs)) return;
  }
  const noc::Flit* head = mesh->eject_peek(c);
  if (!head || head->ready_cycle > cycle) return;
  accept_flit(in, control, mesh->eject_pop(c), cycle);
}

void Node::tick(uint64_t cycle) {
  auto outs = logic_->on_tick(cycle);
  if (!outs.empty()) schedule(std::move(outs), nullptr, 0, 0, cycle);
}

void Node::ingest(uint64_t cycle) {
  pop_plane(ctrl_, in_ctrl_, true, cycle);
  pop_plane(data_, in_data_, false, cycle);
}

void Node::emit(uint64_t cycle) {
  bool port_done[kPortCount] = {false, false, false};
  for (auto it = outq_.begin(); it != outq_.end();) {
    PendingOut& p = *it;
    if (!port_done[p.port]) {
      port_done[p.port] = true;  // only the head message per port may send
      bool starts_message = p.next == 0;
      if ((!starts_message || cycle >= port_free_[p.port]) &&
          unit_releasable(p, p.next, cycle)) {
        bool sent = false;
        if (p.port == kPortWire) {
          if (wire_sink_) {
            wire_sink_(cycle, p.frame, p.next, p.units);
            sent = true;
          }
        } else {
          noc::Mesh* mesh = p.port == kPortCtrl ? ctrl_ : data_;
          if (mesh && mesh->can_inject(at())) {
            mesh->inject(at(), p.flits[p.next]);
            sent = true;
          }
        }
        if (sent) {
          ++work_;
          if (++p.next >= p.units) {
            port_free_[p.port] = cycle + 1 + p.post_gap;
            it = outq_.erase(it);
            continue;
          }
        }
      }
    }
    ++it;
  }
}

bool Node::busy() const {
  if (!outq_.empty()) return true;
  if (in_data_.msg || in_ctrl_.msg) return true;
  if (in_wire_.expect != 0) return true;
  return false;
}

}  // namespace meshstack::sim
