#include "meshstack/topo/plan.hpp"

#include <map>
#include <set>

#include "json.hpp"

namespace meshstack::topo {

using nlohmann::json;

std::string generate_instantiation_plan(const TopologyConfig& cfg) {
  std::map<std::pair<int, int>, const TileDecl*> by_coord;
  std::set<std::string> names;
  for (const auto& t : cfg.tiles) {
    by_coord[{t.x, t.y}] = &t;
    names.insert(t.name);
  }

  json plan;
  plan["width"] = cfg.width;
  plan["height"] = cfg.height;
  plan["control_noc"] = cfg.control_noc;
  plan["fifo_depth"] = cfg.fifo_depth;
  plan["pipeline_depth"] = cfg.pipeline_depth;

  json tiles = json::array();
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      json jt;
      auto it = by_coord.find({x, y});
      const TileDecl* decl = it == by_coord.end() ? nullptr : it->second;
      if (decl) {
        jt["name"] = decl->name;
        jt["kind"] = to_string(decl->kind);
        jt["buffering"] =
            decl->buffering == Buffering::StoreAndForward ? "store_and_forward" : "streaming";
        jt["latency"] = decl->latency;
        jt["generated"] = false;
        if (!decl->params.empty()) {
          json params;
          for (const auto& [k, v] : decl->params) params[k] = v;
          jt["params"] = params;
        }
        if (!decl->routes.empty()) {
          json routes = json::array();
          for (const auto& r : decl->routes) {
            json jr;
            jr["key"] = r.key;
            jr["policy"] = r.policy;
            json dests = json::array();
            for (const auto& d : r.dests) {
              const TileDecl* dt = cfg.tile(d);
              json jd;
              jd["tile"] = d;
              if (dt) jd["at"] = {dt->x, dt->y};
              dests.push_back(jd);
            }
            jr["dests"] = dests;
            routes.push_back(jr);
          }
          jt["routes"] = routes;
        }
      } else {
        std::string name = "empty_" + std::to_string(x) + "_" + std::to_string(y);
        while (names.count(name)) name = "_" + name;
        jt["name"] = name;
        jt["kind"] = "empty";
        jt["generated"] = true;
      }
      jt["x"] = x;
      jt["y"] = y;
      json ports;
      ports["north"] = y > 0 ? json(json::array({x, y - 1})) : json();
      ports["east"] = x + 1 < cfg.width ? json(json::array({x + 1, y})) : json();
      ports["south"] = y + 1 < cfg.height ? json(json::array({x, y + 1})) : json();
      ports["west"] = x > 0 ? json(json::array({x - 1, y})) : json();
      jt["ports"] = ports;
      tiles.push_back(jt);
    }
  }
  plan["tiles"] = tiles;

  json links = json::array();
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      if (x + 1 < cfg.width) {
        links.push_back({{"from", {x, y}}, {"to", {x + 1, y}}});
        links.push_back({{"from", {x + 1, y}}, {"to", {x, y}}});
      }
      if (y + 1 < cfg.height) {
        links.push_back({{"from", {x, y}}, {"to", {x, y + 1}}});
        links.push_back({{"from", {x, y + 1}}, {"to", {x, y}}});
      }
    }
  }
  plan["links"] = links;

  json chains = json::array();
  for (const auto& ch : cfg.chains) {
    json jc;
    jc["plane"] = ch.control ? "control" : "data";
    jc["tiles"] = ch.tiles;
    chains.push_back(jc);
  }
  plan["chains"] = chains;

  return plan.dump(2) + "\n";
}

}  // namespace meshstack::topo
