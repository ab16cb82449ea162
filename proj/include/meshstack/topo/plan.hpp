#pragma once

#include <string>

#include "meshstack/topo/config.hpp"

namespace meshstack::topo {

// Expands a validated config into a wiring plan: every mesh position gets a
// tile (auto-filled with router-only empties), ports are wired to their
// neighbors, and next-hop tables are materialized with coordinates. The
// output is canonical JSON text: same config in, byte-identical plan out.
std::string generate_instantiation_plan(const TopologyConfig& cfg);

}  // namespace meshstack::topo
