#include "meshstack/topo/depgraph.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace meshstack::topo {

DependencyGraph build_dependency_graph(const TopologyConfig& cfg, bool control_plane) {
  DependencyGraph g;
  std::set<noc::Link> nodes;
  std::set<std::tuple<noc::Link, noc::Link, std::string>> edge_set;

  for (size_t ci = 0; ci < cfg.chains.size(); ++ci) {
    const ChainDecl& ch = cfg.chains[ci];
    if (ch.control != control_plane) continue;
    std::string label = "chain#" + std::to_string(ci + 1);
    for (size_t i = 0; i + 1 < ch.tiles.size(); ++i)
      label += (i == 0 ? ":" + ch.tiles[i] : "") + ">" + ch.tiles[i + 1];

    // Acquisition order across the whole chain, with the index of the first
    // link of each hop so store-and-forward tiles can cut between hops.
    std::vector<noc::Link> acq;
    std::vector<size_t> hop_start;  // hop i covers [hop_start[i], hop_start[i+1])
    bool resolved = true;
    for (size_t i = 0; i + 1 < ch.tiles.size(); ++i) {
      const TileDecl* a = cfg.tile(ch.tiles[i]);
      const TileDecl* b = cfg.tile(ch.tiles[i + 1]);
      if (!a || !b) {
        resolved = false;
        break;
      }
      hop_start.push_back(acq.size());
      for (const auto& l : noc::link_sequence(a->coord(), b->coord())) acq.push_back(l);
    }
    if (!resolved) continue;
    hop_start.push_back(acq.size());

    for (const auto& l : acq) nodes.insert(l);

    // Span boundaries: before hop 0, after the last hop, and after every hop
    // that ENDS at a store-and-forward tile (the message drains there).
    size_t hops = ch.tiles.size() - 1;
    size_t span_begin = 0;
    for (size_t h = 0; h < hops; ++h) {
      bool cut = (h + 1 == hops);
      if (!cut) {
        const TileDecl* mid = cfg.tile(ch.tiles[h + 1]);
        cut = mid && mid->buffering == Buffering::StoreAndForward;
      }
      if (!cut) continue;
      size_t begin = hop_start[span_begin];
      size_t end = hop_start[h + 1];
      for (size_t a = begin; a < end; ++a)
        for (size_t b = a + 1; b < end; ++b)
          edge_set.emplace(acq[a], acq[b], label);
      span_begin = h + 1;
    }
  }

  g.nodes.assign(nodes.begin(), nodes.end());
  for (const auto& [from, to, chain] : edge_set) g.edges.push_back({from, to, chain});
  return g;
}

namespace {

// Iterative Tarjan; recursion depth on big meshes is not worth risking.
struct Tarjan {
  const std::vector<std::vector<int>>& adj;
  std::vector<int> index, lowlink, on_stack;
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  int counter = 0;

  explicit Tarjan(const std::vector<std::vector<int>>& a)
      : adj(a), index(a.size(), -1), lowlink(a.size(), 0), on_stack(a.size(), 0) {}

  void run(int root) {
    struct Frame {
      int v;
      size_t next_edge;
    };
    std::vector<Frame> frames{{root, 0}};
    index[root] = lowlink[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next_edge < adj[f.v].size()) {
        int w = adj[f.v][f.next_edge++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
      } else {
        int v = f.v;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[v]);
        if (lowlink[v] == index[v]) {
          std::vector<int> comp;
          for (;;) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp.push_back(w);
            if (w == v) break;
          }
          sccs.push_back(std::move(comp));
        }
      }
    }
  }
};

}  // namespace

DeadlockReport detect_deadlock(const DependencyGraph& g) {
  DeadlockReport report;
  std::map<noc::Link, int> id;
  for (size_t i = 0; i < g.nodes.size(); ++i) id[g.nodes[i]] = int(i);

  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const auto& e : g.edges) adj[id.at(e.from)].push_back(id.at(e.to));
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  Tarjan t(adj);
  for (size_t i = 0; i < adj.size(); ++i)
    if (t.index[i] == -1) t.run(int(i));

  for (auto& comp : t.sccs) {
    bool cyclic = comp.size() > 1;
    if (!cyclic) {
      for (int w : adj[comp[0]])
        if (w == comp[0]) cyclic = true;
    }
    if (!cyclic) continue;
    DeadlockCycle cyc;
    std::sort(comp.begin(), comp.end());
    std::set<int> members(comp.begin(), comp.end());
    for (int v : comp) cyc.links.push_back(g.nodes[v]);
    std::set<std::string> chains;
    for (const auto& e : g.edges)
      if (members.count(id.at(e.from)) && members.count(id.at(e.to))) chains.insert(e.chain);
    cyc.chains.assign(chains.begin(), chains.end());
    report.cycles.push_back(std::move(cyc));
  }
  std::sort(report.cycles.begin(), report.cycles.end(),
            [](const DeadlockCycle& a, const DeadlockCycle& b) { return a.links < b.links; });
  report.deadlock_free = report.cycles.empty();
  return report;
}

}  // namespace meshstack::topo
