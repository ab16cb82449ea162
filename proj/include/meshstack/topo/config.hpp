#pragma once

#include <map>
#include <string>
#include <vector>

#include "meshstack/noc/coord.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::topo {

enum class TileKind {
  Empty,      // router-only filler
  EthRx, EthTx,
  IpRx, IpTx,
  UdpRx, UdpTx,
  TcpRx, TcpTx,
  Echo,       // UDP/TCP echo application
  RsEncode,   // Reed-Solomon encoder application
  Witness,    // replication witness application
  Scheduler,  // work scheduler / load balancer
  Nat,
  IpEncap, IpDecap,
  Buffer,     // store-and-forward memory tile
  Logger,
  Controller,
  Relay,      // generic forwarding tile for layout experiments
};

const char* to_string(TileKind k);
Result<TileKind> tile_kind_from_string(const std::string& s);

enum class Buffering { Streaming, StoreAndForward };

// Tiles that hold a whole message before re-emitting, by construction.
Buffering default_buffering(TileKind k);

// One next-hop table entry: a match key such as "ethertype:0x0800",
// "protocol:17" or "dst_port:7000" mapping to one destination tile, or to a
// group of tiles balanced round-robin or by flow hash.
struct RouteEntry {
  std::string key;
  std::vector<std::string> dests;
  std::string policy;  // "single", "round_robin" or "flow_hash"
};

struct TileDecl {
  std::string name;
  int x = 0;
  int y = 0;
  TileKind kind = TileKind::Empty;
  Buffering buffering = Buffering::Streaming;
  int latency = 2;  // cut-through latency in cycles
  std::vector<RouteEntry> routes;
  std::map<std::string, std::string> params;  // kind-specific knobs (port=, capacity=, ...)
  bool generated = false;                     // auto-filled empty tile
  int line = 0;                               // source location for diagnostics

  noc::Coord coord() const { return {uint8_t(x), uint8_t(y)}; }
};

// An ordered traffic flow over tiles; the unit of dependency analysis.
struct ChainDecl {
  std::vector<std::string> tiles;
  bool control = false;
  int line = 0;
};

struct TopologyConfig {
  int width = 0;
  int height = 0;
  bool control_noc = false;
  int fifo_depth = 4;      // per-input-port FIFO depth, in flits
  int pipeline_depth = 1;  // router register stages per link traversal
  std::vector<TileDecl> tiles;
  std::vector<ChainDecl> chains;

  const TileDecl* tile(const std::string& name) const {
    for (const auto& t : tiles)
      if (t.name == name) return &t;
    return nullptr;
  }
};

// Parsing covers syntax and field shape; validate_topology covers semantics.
// The XML form is canonical; an equivalent JSON form is accepted and detected
// by the first non-space byte.
Result<TopologyConfig> parse_topology_text(const std::string& text, const std::string& filename);
Result<TopologyConfig> parse_topology_file(const std::string& path);

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string message;
};

std::vector<Diagnostic> validate_topology(const TopologyConfig& cfg);

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Diagnostic::Severity::Error) return true;
  return false;
}

}  // namespace meshstack::topo
