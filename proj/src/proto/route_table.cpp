#include "meshstack/proto/route_table.hpp"

#include <cstdlib>

namespace meshstack::proto {

namespace {

bool parse_value(const std::string& s, uint32_t* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  unsigned long v = std::strtoul(s.c_str(), &end, 0);
  if (end != s.c_str() + s.size() || v > 0xFFFFFFFFul) return false;
  *out = uint32_t(v);
  return true;
}

}  // namespace

Result<NextHopTable> NextHopTable::compile(
    const std::vector<topo::RouteEntry>& entries, const Resolver& resolve,
    uint64_t hash_seed) {
  using R = Result<NextHopTable>;
  NextHopTable t;
  t.seed_ = hash_seed;
  for (const auto& e : entries) {
    Rule rule;
    if (e.key == "default") {
      rule.field = Field::Default;
    } else {
      auto colon = e.key.find(':');
      if (colon == std::string::npos)
        return R::failure("route key '" + e.key + "' is not field:value or default");
      std::string field = e.key.substr(0, colon);
      std::string value = e.key.substr(colon + 1);
      if (field == "ethertype") rule.field = Field::Ethertype;
      else if (field == "protocol") rule.field = Field::Protocol;
      else if (field == "dst_port") rule.field = Field::DstPort;
      else if (field == "src_port") rule.field = Field::SrcPort;
      else return R::failure("unknown route match field '" + field + "'");
      if (!parse_value(value, &rule.value))
        return R::failure("bad value '" + value + "' in route key '" + e.key + "'");
    }

    if (e.policy == "single") rule.policy = Policy::Single;
    else if (e.policy == "round_robin") rule.policy = Policy::RoundRobin;
    else if (e.policy == "flow_hash") rule.policy = Policy::FlowHash;
    else return R::failure("unknown route policy '" + e.policy + "'");
    if (e.dests.empty())
      return R::failure("route '" + e.key + "' has no destinations");
    if (rule.policy == Policy::Single && e.dests.size() != 1)
      return R::failure("route '" + e.key + "' lists " +
                        std::to_string(e.dests.size()) +
                        " destinations but policy is single");

    for (const auto& name : e.dests) {
      auto at = resolve(name);
      if (!at) return R::failure("route destination '" + name + "' is not a tile");
      rule.dests.push_back({name, *at});
    }
    t.rules_.push_back(std::move(rule));
  }
  return R::success(std::move(t));
}

bool NextHopTable::matches(const Rule& r, const PacketMeta& m) const {
  switch (r.field) {
    case Field::Ethertype: return m.has(kLayerEth) && m.ethertype == r.value;
    case Field::Protocol: return m.has(kLayerIp) && m.ip_proto == r.value;
    case Field::DstPort:
      return m.has(kLayerUdp | kLayerTcp) && m.dst_port == r.value;
    case Field::SrcPort:
      return m.has(kLayerUdp | kLayerTcp) && m.src_port == r.value;
    case Field::Default: return true;
  }
  return false;
}

std::optional<NextHop> NextHopTable::select(const PacketMeta& m) {
  for (auto& r : rules_) {
    if (!matches(r, m)) continue;
    switch (r.policy) {
      case Policy::Single: return r.dests[0];
      case Policy::RoundRobin: return r.dests[r.rr++ % r.dests.size()];
      case Policy::FlowHash:
        return r.dests[flow_hash(m, seed_) % r.dests.size()];
    }
  }
  return std::nullopt;
}

}  // namespace meshstack::proto
