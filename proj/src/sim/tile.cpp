#include "meshstack/sim/tile.hpp"

namespace meshstack::sim {

std::vector<OutMessage> TileLogic::on_wire_frame(const std::vector<uint8_t>&,
                                                 uint64_t) {
  count("unexpected_wire_frame");
  return {};
}

std::vector<OutMessage> TileLogic::on_tick(uint64_t) { return {}; }

const std::string* TileLogic::param(const std::string& key) const {
  if (!env_.decl) return nullptr;
  auto it = env_.decl->params.find(key);
  return it == env_.decl->params.end() ? nullptr : &it->second;
}

int TileLogic::param_int(const std::string& key, int fallback) const {
  const std::string* v = param(key);
  if (!v) return fallback;
  try {
    return std::stoi(*v, nullptr, 0);
  } catch (...) {
    return fallback;
  }
}

std::string TileLogic::param_str(const std::string& key,
                                 const std::string& fallback) const {
  const std::string* v = param(key);
  return v ? *v : fallback;
}

std::optional<proto::NextHop> TileLogic::route(const proto::PacketMeta& m) {
  auto hop = env_.table.select(m);
  if (!hop) count("route_miss_drop");
  return hop;
}

std::optional<noc::Coord> TileLogic::tile_coord(const std::string& name) const {
  if (!env_.cfg) return std::nullopt;
  const topo::TileDecl* t = env_.cfg->tile(name);
  if (!t) return std::nullopt;
  return t->coord();
}

noc::NocMessage data_message(noc::Coord dst, const proto::PacketMeta& meta,
                             std::vector<uint8_t> payload) {
  noc::NocMessage m;
  m.dst = dst;
  auto bytes = meta.serialize();
  m.metadata.assign(bytes.begin(), bytes.end());
  m.payload = std::move(payload);
  return m;
}

}  // namespace meshstack::sim
