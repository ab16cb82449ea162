#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "meshstack/noc/coord.hpp"
#include "meshstack/proto/meta.hpp"
#include "meshstack/topo/config.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::proto {

struct NextHop {
  std::string tile;
  noc::Coord at;
};

// A tile's next-hop table, compiled from its configured route entries.
// Keys are "<field>:<value>" with fields ethertype, protocol, dst_port and
// src_port (values decimal or 0x-hex), or the bare word "default". Entries
// match in declaration order; a miss means drop, counted by the caller.
class NextHopTable {
 public:
  using Resolver =
      std::function<std::optional<noc::Coord>(const std::string&)>;

  static Result<NextHopTable> compile(
      const std::vector<topo::RouteEntry>& entries, const Resolver& resolve,
      uint64_t hash_seed = 0);

  // Picks the destination for a packet; round_robin entries advance their
  // cursor, flow_hash entries keep one flow on one destination.
  std::optional<NextHop> select(const PacketMeta& m);

  bool empty() const { return rules_.empty(); }

 private:
  enum class Field { Ethertype, Protocol, DstPort, SrcPort, Default };
  enum class Policy { Single, RoundRobin, FlowHash };
  struct Rule {
    Field field = Field::Default;
    uint32_t value = 0;
    std::vector<NextHop> dests;
    Policy policy = Policy::Single;
    size_t rr = 0;
  };
  bool matches(const Rule& r, const PacketMeta& m) const;

  std::vector<Rule> rules_;
  uint64_t seed_ = 0;
};

}  // namespace meshstack::proto
