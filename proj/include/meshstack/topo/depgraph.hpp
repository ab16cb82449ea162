#pragma once

#include <string>
#include <vector>

#include "meshstack/noc/coord.hpp"
#include "meshstack/topo/config.hpp"

namespace meshstack::topo {

// Channel dependency analysis. Nodes are unidirectional mesh links; an edge
// L1 -> L2 records that some chain can hold L1 while waiting to acquire L2.
//
// For a chain t1 -> t2 -> ... -> tk, each hop acquires link_sequence(ti,
// ti+1) in order. A streaming tile begins re-emitting before its input tail
// has drained, so every link of the hops before it can still be held when
// the links after it are acquired: within a maximal run of streaming tiles
// all earlier links depend on all later ones (including a link on itself if
// it appears twice). A store-and-forward tile absorbs the whole message and
// cuts the run. This is conservative: it assumes messages long enough to
// span the whole run.
struct DepEdge {
  noc::Link from;
  noc::Link to;
  std::string chain;  // label of the chain inducing the edge
};

struct DependencyGraph {
  std::vector<noc::Link> nodes;  // sorted, unique
  std::vector<DepEdge> edges;    // deduplicated per (from, to, chain)
};

DependencyGraph build_dependency_graph(const TopologyConfig& cfg, bool control_plane = false);

struct DeadlockCycle {
  std::vector<noc::Link> links;      // members of the strongly connected component
  std::vector<std::string> chains;   // chains contributing internal edges
};

struct DeadlockReport {
  bool deadlock_free = true;
  std::vector<DeadlockCycle> cycles;
};

// Tarjan SCC over the dependency graph. A component with at least one
// internal edge (two or more links, or a self-dependent link) is a cycle.
DeadlockReport detect_deadlock(const DependencyGraph& g);

}  // namespace meshstack::topo
