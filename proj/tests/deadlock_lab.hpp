#pragma once

// Library of small layouts where the static channel-dependency verdict is
// cross-checked against a dynamic long-message saturation run. Shared by
// the unit tests and the acceptance suite.
//
// Relay layouts generate 2048-byte messages (34 flits — several times the
// per-path FIFO storage, so worms span whole chains); protocol layouts are
// driven with 2048-byte UDP packets through the Ethernet wire. A layout
// whose dependency graph is cyclic is expected to wedge; an acyclic one
// must drain every generated message.

#include <memory>
#include <string>
#include <vector>

#include "meshstack/sim/engine.hpp"
#include "meshstack/sim/traffic.hpp"
#include "meshstack/topo/config.hpp"
#include "meshstack/topo/depgraph.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::lab {

struct LabCase {
  std::string name;
  std::string xml;
  bool cyclic = false;     // expected static verdict
  bool udp_drive = false;  // drive port0 with a UDP client instead of relays
};

struct LabOutcome {
  bool static_cyclic = false;
  bool dynamic_wedged = false;
  bool drained = false;  // every generated message reached a sink
  uint64_t generated = 0;
  uint64_t sunk = 0;
};

inline std::vector<LabCase> lab_cases() {
  std::vector<LabCase> cases;
  auto add = [&cases](std::string name, bool cyclic, bool udp,
                      std::string xml) {
    cases.push_back({std::move(name), std::move(xml), cyclic, udp});
  };

  const char* kGen = " gen_len=\"2048\" gen_every=\"1\" gen_count=\"12\"";
  auto gen_tile = [kGen](const std::string& name, int x, int y,
                         const std::string& dst) {
    return "  <tile name=\"" + name + "\" kind=\"relay\" x=\"" +
           std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" gen_dst=\"" +
           dst + "\"" + kGen + "/>\n";
  };
  auto relay_tile = [](const std::string& name, int x, int y,
                       const std::string& next) {
    return "  <tile name=\"" + name + "\" kind=\"relay\" x=\"" +
           std::to_string(x) + "\" y=\"" + std::to_string(y) +
           (next.empty() ? std::string("\"/>\n")
                         : "\" next=\"" + next + "\"/>\n");
  };
  auto buffer_tile = [](const std::string& name, int x, int y,
                        const std::string& next) {
    return "  <tile name=\"" + name + "\" kind=\"buffer\" x=\"" +
           std::to_string(x) + "\" y=\"" + std::to_string(y) + "\">\n" +
           "    <route key=\"default\" dest=\"" + next + "\"/>\n  </tile>\n";
  };
  auto chain = [](const std::string& tiles) {
    return "  <chain tiles=\"" + tiles + "\"/>\n";
  };
  auto design = [](int w, int h, const std::string& body) {
    return "<?xml version=\"1.0\"?>\n<design width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\">\n" + body + "</design>\n";
  };

  // -- acyclic relay layouts --------------------------------------------------
  add("straight_row_chain", false, false,
      design(4, 1,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 1, 0, "b") +
                 relay_tile("b", 2, 0, "s") + relay_tile("s", 3, 0, "") +
                 chain("g, a, b, s")));

  add("column_in_order", false, false,
      design(1, 4,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 0, 1, "b") +
                 relay_tile("b", 0, 2, "s") + relay_tile("s", 0, 3, "") +
                 chain("g, a, b, s")));

  add("l_shape_chain", false, false,
      design(3, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "s") +
                 relay_tile("s", 2, 1, "") + chain("g, a, s")));

  add("two_parallel_rows", false, false,
      design(4, 2,
             gen_tile("g0", 0, 0, "s0") + relay_tile("s0", 3, 0, "") +
                 gen_tile("g1", 0, 1, "s1") + relay_tile("s1", 3, 1, "") +
                 chain("g0, s0") + chain("g1, s1")));

  add("crossing_x_legs", false, false,
      design(3, 2,
             gen_tile("g0", 0, 0, "s0") + relay_tile("s0", 2, 1, "") +
                 gen_tile("g1", 0, 1, "s1") + relay_tile("s1", 2, 0, "") +
                 chain("g0, s0") + chain("g1, s1")));

  add("snake_no_reuse", false, false,
      design(4, 3,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 3, 0, "b") +
                 relay_tile("b", 3, 1, "c") + relay_tile("c", 0, 1, "d") +
                 relay_tile("d", 0, 2, "s") + relay_tile("s", 3, 2, "") +
                 chain("g, a, b, c, d, s")));

  add("three_columns_south", false, false,
      design(4, 4,
             gen_tile("g0", 0, 0, "s0") + relay_tile("s0", 0, 3, "") +
                 gen_tile("g1", 1, 0, "s1") + relay_tile("s1", 1, 3, "") +
                 gen_tile("g2", 3, 0, "s2") + relay_tile("s2", 3, 3, "") +
                 chain("g0, s0") + chain("g1, s1") + chain("g2, s2")));

  add("counterflow_rows", false, false,
      design(4, 2,
             gen_tile("ge", 0, 0, "se") + relay_tile("se", 3, 0, "") +
                 gen_tile("gw", 3, 1, "sw") + relay_tile("sw", 0, 1, "") +
                 chain("ge, se") + chain("gw, sw")));

  add("hotspot_merge", false, false,
      design(3, 3,
             gen_tile("g0", 0, 0, "s") + gen_tile("g1", 0, 2, "s") +
                 relay_tile("s", 2, 1, "") + chain("g0, s") + chain("g1, s")));

  add("bounce_not_a_loop", false, false,
      design(3, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 1, 1, "s") +
                 relay_tile("s", 2, 0, "") + chain("g, a, s")));

  add("back_row_detour", false, false,
      design(3, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "b") +
                 relay_tile("b", 2, 1, "s") + relay_tile("s", 0, 1, "") +
                 chain("g, a, b, s")));

  // -- cyclic relay layouts (a link reacquired within a streaming span) --------
  add("double_east_small", true, false,
      design(3, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "b") +
                 relay_tile("b", 1, 0, "s") + relay_tile("s", 2, 1, "") +
                 chain("g, a, b, s")));

  add("double_east_row", true, false,
      design(4, 1,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "b") +
                 relay_tile("b", 1, 0, "s") + relay_tile("s", 3, 0, "") +
                 chain("g, a, b, s")));

  add("double_west_row", true, false,
      design(4, 1,
             gen_tile("g", 3, 0, "a") + relay_tile("a", 1, 0, "b") +
                 relay_tile("b", 2, 0, "s") + relay_tile("s", 0, 0, "") +
                 chain("g, a, b, s")));

  add("double_east_far", true, false,
      design(4, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 3, 0, "b") +
                 relay_tile("b", 2, 0, "s") + relay_tile("s", 3, 1, "") +
                 chain("g, a, b, s")));

  add("double_east_wide", true, false,
      design(4, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 3, 0, "b") +
                 relay_tile("b", 1, 0, "s") + relay_tile("s", 3, 1, "") +
                 chain("g, a, b, s")));

  add("double_south_column", true, false,
      design(1, 4,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 0, 2, "b") +
                 relay_tile("b", 0, 1, "s") + relay_tile("s", 0, 3, "") +
                 chain("g, a, b, s")));

  add("ring_four_stage", true, false,
      design(4, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "b") +
                 relay_tile("b", 1, 0, "c") + relay_tile("c", 3, 0, "s") +
                 relay_tile("s", 3, 1, "") + chain("g, a, b, c, s")));

  // -- store-and-forward cuts ---------------------------------------------------
  add("ring_cut_by_buffer", false, false,
      design(4, 1,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "cut") +
                 buffer_tile("cut", 1, 0, "s") + relay_tile("s", 3, 0, "") +
                 chain("g, a, cut, s")));

  add("double_east_cut", false, false,
      design(3, 2,
             gen_tile("g", 0, 0, "a") + relay_tile("a", 2, 0, "cut") +
                 buffer_tile("cut", 1, 1, "s") + relay_tile("s", 2, 1, "") +
                 chain("g, a, cut, s")));

  // -- protocol-stack layouts -----------------------------------------------
  // Out of pipeline order: the UDP tile's output must recross the link its
  // own input worm still occupies.
  add("protocol_out_of_order", true, true,
      std::string("<?xml version=\"1.0\"?>\n<design width=\"4\" height=\"1\">\n") +
          "  <tile name=\"eth0\" kind=\"eth_rx\" x=\"0\" y=\"0\" wire_in=\"port0\" rx_queue=\"64\">\n"
          "    <route key=\"ethertype:0x0800\" dest=\"ip0\"/>\n  </tile>\n"
          "  <tile name=\"udp0\" kind=\"udp_rx\" x=\"1\" y=\"0\">\n"
          "    <route key=\"default\" dest=\"app0\"/>\n  </tile>\n"
          "  <tile name=\"ip0\" kind=\"ip_rx\" x=\"2\" y=\"0\">\n"
          "    <route key=\"protocol:17\" dest=\"udp0\"/>\n  </tile>\n"
          "  <tile name=\"app0\" kind=\"relay\" x=\"3\" y=\"0\"/>\n" +
          chain("eth0, ip0, udp0, app0") + "</design>\n");

  // Same tiles in pipeline order: resources acquired strictly eastward.
  add("protocol_in_order", false, true,
      std::string("<?xml version=\"1.0\"?>\n<design width=\"4\" height=\"1\">\n") +
          "  <tile name=\"eth0\" kind=\"eth_rx\" x=\"0\" y=\"0\" wire_in=\"port0\" rx_queue=\"64\">\n"
          "    <route key=\"ethertype:0x0800\" dest=\"ip0\"/>\n  </tile>\n"
          "  <tile name=\"ip0\" kind=\"ip_rx\" x=\"1\" y=\"0\">\n"
          "    <route key=\"protocol:17\" dest=\"udp0\"/>\n  </tile>\n"
          "  <tile name=\"udp0\" kind=\"udp_rx\" x=\"2\" y=\"0\">\n"
          "    <route key=\"default\" dest=\"app0\"/>\n  </tile>\n"
          "  <tile name=\"app0\" kind=\"relay\" x=\"3\" y=\"0\"/>\n" +
          chain("eth0, ip0, udp0, app0") + "</design>\n");

  // Out-of-order layout with a store-and-forward buffer splicing the chain
  // off the contended row before the second eastward pass.
  add("protocol_buffer_cut", false, true,
      std::string("<?xml version=\"1.0\"?>\n<design width=\"4\" height=\"2\">\n") +
          "  <tile name=\"eth0\" kind=\"eth_rx\" x=\"0\" y=\"0\" wire_in=\"port0\" rx_queue=\"64\">\n"
          "    <route key=\"ethertype:0x0800\" dest=\"ip0\"/>\n  </tile>\n"
          "  <tile name=\"udp0\" kind=\"udp_rx\" x=\"1\" y=\"0\">\n"
          "    <route key=\"default\" dest=\"buf0\"/>\n  </tile>\n"
          "  <tile name=\"ip0\" kind=\"ip_rx\" x=\"2\" y=\"0\">\n"
          "    <route key=\"protocol:17\" dest=\"udp0\"/>\n  </tile>\n"
          "  <tile name=\"buf0\" kind=\"buffer\" x=\"1\" y=\"1\">\n"
          "    <route key=\"default\" dest=\"app0\"/>\n  </tile>\n"
          "  <tile name=\"app0\" kind=\"relay\" x=\"3\" y=\"0\"/>\n" +
          chain("eth0, ip0, udp0, buf0, app0") + "</design>\n");

  return cases;
}

inline Result<LabOutcome> run_lab_case(const LabCase& c, uint64_t seed = 1) {
  using R = Result<LabOutcome>;
  auto cfg = topo::parse_topology_text(c.xml, c.name + ".xml");
  if (!cfg.ok()) return R::failure(c.name + ": " + cfg.err);

  LabOutcome out;
  auto graph = topo::build_dependency_graph(*cfg);
  out.static_cyclic = !topo::detect_deadlock(graph).deadlock_free;

  auto eng = sim::Engine::build(std::move(*cfg), sim::Engine::Options{seed});
  if (!eng.ok()) return R::failure(c.name + ": " + eng.err);

  const uint64_t kLimit = 60000, kQuiet = 3000;
  if (c.udp_drive) {
    sim::EchoClient::Config cc;
    cc.payload_len = 2048;
    cc.interval = 8;  // open loop, fast enough to overlap worms
    cc.total = 24;
    auto* wire = (*eng)->wire_in("port0");
    if (!wire) return R::failure(c.name + ": missing wire port0");
    sim::EchoClient client(cc, wire);
    uint64_t quiet_until = 0;
    while ((*eng)->cycle() < kLimit) {
      client.step((*eng)->cycle());
      (*eng)->step();
      bool active = (*eng)->any_busy() || !wire->idle() || client.sent < cc.total;
      quiet_until = active ? 0 : quiet_until + 1;
      if (quiet_until > kQuiet) break;
    }
    out.generated = client.sent;
  } else {
    (*eng)->run_until_quiet(kLimit, kQuiet);
  }
  out.dynamic_wedged = (*eng)->wedged();

  for (const auto& n : (*eng)->nodes()) {
    auto& ctr = n->logic().counters;
    auto get = [&ctr](const char* k) {
      auto it = ctr.find(k);
      return it == ctr.end() ? uint64_t(0) : it->second;
    };
    if (!c.udp_drive) out.generated += get("generated");
    out.sunk += get("sunk");
  }
  out.drained = !out.dynamic_wedged && out.generated > 0 &&
                out.sunk == out.generated;
  return R::success(std::move(out));
}

}  // namespace meshstack::lab
