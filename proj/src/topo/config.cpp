#include "meshstack/topo/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "meshstack/topo/xml.hpp"

namespace meshstack::topo {

namespace {

const std::pair<TileKind, const char*> kKindNames[] = {
    {TileKind::Empty, "empty"},         {TileKind::EthRx, "eth_rx"},
    {TileKind::EthTx, "eth_tx"},        {TileKind::IpRx, "ip_rx"},
    {TileKind::IpTx, "ip_tx"},          {TileKind::UdpRx, "udp_rx"},
    {TileKind::UdpTx, "udp_tx"},        {TileKind::TcpRx, "tcp_rx"},
    {TileKind::TcpTx, "tcp_tx"},        {TileKind::Echo, "echo"},
    {TileKind::RsEncode, "rs_encode"},  {TileKind::Witness, "witness"},
    {TileKind::Scheduler, "scheduler"}, {TileKind::Nat, "nat"},
    {TileKind::IpEncap, "ip_encap"},    {TileKind::IpDecap, "ip_decap"},
    {TileKind::Buffer, "buffer"},       {TileKind::Logger, "logger"},
    {TileKind::Controller, "controller"}, {TileKind::Relay, "relay"},
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_int(const std::string& s, int* out) {
  try {
    size_t used = 0;
    int v = std::stoi(s, &used, 0);
    if (used != s.size()) return false;
    *out = v;
    return true;
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool* out) {
  if (s == "true" || s == "1") { *out = true; return true; }
  if (s == "false" || s == "0") { *out = false; return true; }
  return false;
}

std::string normalize_route_policy(const RouteEntry& r) {
  if (!r.policy.empty()) return r.policy;
  return r.dests.size() > 1 ? "round_robin" : "single";
}

using Fail = Result<TopologyConfig>;

Result<TopologyConfig> parse_xml_config(const std::string& text, const std::string& filename) {
  auto doc = xml_parse(text);
  if (!doc.ok()) return Fail::failure(filename + ": " + doc.err);
  const XmlNode& root = *doc;
  if (root.name != "design")
    return Fail::failure(filename + ": root element must be <design>, got <" + root.name + "> at line " +
                         std::to_string(root.line));

  TopologyConfig cfg;
  auto need_int_attr = [&](const XmlNode& n, const char* key, int* out) -> std::string {
    const std::string* v = n.attr(key);
    if (!v) return "<" + n.name + "> is missing attribute '" + key + "' at line " + std::to_string(n.line);
    if (!parse_int(*v, out))
      return "attribute '" + std::string(key) + "' is not an integer at line " + std::to_string(n.line);
    return "";
  };

  if (auto e = need_int_attr(root, "width", &cfg.width); !e.empty()) return Fail::failure(filename + ": " + e);
  if (auto e = need_int_attr(root, "height", &cfg.height); !e.empty()) return Fail::failure(filename + ": " + e);
  if (const std::string* v = root.attr("control_noc"))
    if (!parse_bool(*v, &cfg.control_noc))
      return Fail::failure(filename + ": attribute 'control_noc' is not a boolean");
  if (root.attr("fifo_depth"))
    if (auto e = need_int_attr(root, "fifo_depth", &cfg.fifo_depth); !e.empty())
      return Fail::failure(filename + ": " + e);
  if (root.attr("pipeline_depth"))
    if (auto e = need_int_attr(root, "pipeline_depth", &cfg.pipeline_depth); !e.empty())
      return Fail::failure(filename + ": " + e);

  for (const XmlNode& n : root.children) {
    if (n.name == "tile") {
      TileDecl t;
      t.line = n.line;
      const std::string* name = n.attr("name");
      const std::string* kind = n.attr("kind");
      if (!name || name->empty())
        return Fail::failure(filename + ": <tile> missing 'name' at line " + std::to_string(n.line));
      t.name = *name;
      if (!kind)
        return Fail::failure(filename + ": <tile> missing 'kind' at line " + std::to_string(n.line));
      auto k = tile_kind_from_string(*kind);
      if (!k.ok()) return Fail::failure(filename + ": " + k.err + " at line " + std::to_string(n.line));
      t.kind = *k;
      t.buffering = default_buffering(t.kind);
      if (auto e = need_int_attr(n, "x", &t.x); !e.empty()) return Fail::failure(filename + ": " + e);
      if (auto e = need_int_attr(n, "y", &t.y); !e.empty()) return Fail::failure(filename + ": " + e);
      for (const auto& [key, value] : n.attrs) {
        if (key == "name" || key == "kind" || key == "x" || key == "y") continue;
        if (key == "latency") {
          if (!parse_int(value, &t.latency) || t.latency < 0)
            return Fail::failure(filename + ": bad 'latency' at line " + std::to_string(n.line));
        } else if (key == "buffering") {
          if (value == "streaming") t.buffering = Buffering::Streaming;
          else if (value == "store_and_forward") t.buffering = Buffering::StoreAndForward;
          else return Fail::failure(filename + ": unknown buffering '" + value + "' at line " +
                                    std::to_string(n.line));
        } else {
          t.params[key] = value;
        }
      }
      for (const XmlNode& r : n.children) {
        if (r.name != "route")
          return Fail::failure(filename + ": unexpected element <" + r.name + "> inside <tile> at line " +
                               std::to_string(r.line));
        RouteEntry route;
        const std::string* key = r.attr("key");
        if (!key)
          return Fail::failure(filename + ": <route> missing 'key' at line " + std::to_string(r.line));
        route.key = *key;
        if (const std::string* d = r.attr("dest")) route.dests.push_back(*d);
        if (const std::string* d = r.attr("dests")) {
          auto more = split_list(*d);
          route.dests.insert(route.dests.end(), more.begin(), more.end());
        }
        if (route.dests.empty())
          return Fail::failure(filename + ": <route> needs 'dest' or 'dests' at line " +
                               std::to_string(r.line));
        if (const std::string* p = r.attr("policy")) route.policy = *p;
        route.policy = normalize_route_policy(route);
        t.routes.push_back(std::move(route));
      }
      cfg.tiles.push_back(std::move(t));
    } else if (n.name == "chain") {
      ChainDecl ch;
      ch.line = n.line;
      const std::string* tiles = n.attr("tiles");
      if (!tiles)
        return Fail::failure(filename + ": <chain> missing 'tiles' at line " + std::to_string(n.line));
      ch.tiles = split_list(*tiles);
      if (const std::string* p = n.attr("plane")) {
        if (*p == "control") ch.control = true;
        else if (*p != "data")
          return Fail::failure(filename + ": unknown chain plane '" + *p + "' at line " +
                               std::to_string(n.line));
      }
      cfg.chains.push_back(std::move(ch));
    } else {
      return Fail::failure(filename + ": unexpected element <" + n.name + "> at line " +
                           std::to_string(n.line));
    }
  }
  return Fail::success(std::move(cfg));
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

Result<TopologyConfig> parse_json_config(const std::string& text, const std::string& filename) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) return Fail::failure(filename + ": invalid JSON");
  if (!j.is_object()) return Fail::failure(filename + ": top level must be an object");

  TopologyConfig cfg;
  if (!j.contains("width") || !j["width"].is_number_integer())
    return Fail::failure(filename + ": missing integer 'width'");
  if (!j.contains("height") || !j["height"].is_number_integer())
    return Fail::failure(filename + ": missing integer 'height'");
  cfg.width = j["width"].get<int>();
  cfg.height = j["height"].get<int>();
  cfg.control_noc = j.value("control_noc", false);
  cfg.fifo_depth = j.value("fifo_depth", cfg.fifo_depth);
  cfg.pipeline_depth = j.value("pipeline_depth", cfg.pipeline_depth);

  for (const auto& jt : j.value("tiles", nlohmann::json::array())) {
    TileDecl t;
    if (!jt.contains("name") || !jt.contains("kind") || !jt.contains("x") || !jt.contains("y"))
      return Fail::failure(filename + ": every tile needs name, kind, x, y");
    t.name = jt["name"].get<std::string>();
    auto k = tile_kind_from_string(jt["kind"].get<std::string>());
    if (!k.ok()) return Fail::failure(filename + ": " + k.err);
    t.kind = *k;
    t.buffering = default_buffering(t.kind);
    t.x = jt["x"].get<int>();
    t.y = jt["y"].get<int>();
    for (auto it = jt.begin(); it != jt.end(); ++it) {
      const std::string& key = it.key();
      if (key == "name" || key == "kind" || key == "x" || key == "y" || key == "routes") continue;
      if (key == "latency") {
        t.latency = it.value().get<int>();
        if (t.latency < 0) return Fail::failure(filename + ": bad 'latency' on tile " + t.name);
      } else if (key == "buffering") {
        std::string b = it.value().get<std::string>();
        if (b == "streaming") t.buffering = Buffering::Streaming;
        else if (b == "store_and_forward") t.buffering = Buffering::StoreAndForward;
        else return Fail::failure(filename + ": unknown buffering '" + b + "'");
      } else if (key == "params" && it.value().is_object()) {
        for (auto p = it.value().begin(); p != it.value().end(); ++p)
          t.params[p.key()] = json_scalar_to_string(p.value());
      } else {
        t.params[key] = json_scalar_to_string(it.value());
      }
    }
    for (const auto& jr : jt.value("routes", nlohmann::json::array())) {
      RouteEntry route;
      if (!jr.contains("key")) return Fail::failure(filename + ": route without 'key' on tile " + t.name);
      route.key = jr["key"].get<std::string>();
      if (jr.contains("dest")) route.dests.push_back(jr["dest"].get<std::string>());
      for (const auto& d : jr.value("dests", nlohmann::json::array()))
        route.dests.push_back(d.get<std::string>());
      if (route.dests.empty())
        return Fail::failure(filename + ": route needs 'dest' or 'dests' on tile " + t.name);
      route.policy = jr.value("policy", std::string());
      route.policy = normalize_route_policy(route);
      t.routes.push_back(std::move(route));
    }
    cfg.tiles.push_back(std::move(t));
  }
  for (const auto& jc : j.value("chains", nlohmann::json::array())) {
    ChainDecl ch;
    for (const auto& name : jc.value("tiles", nlohmann::json::array()))
      ch.tiles.push_back(name.get<std::string>());
    ch.control = jc.value("plane", std::string("data")) == "control";
    cfg.chains.push_back(std::move(ch));
  }
  return Fail::success(std::move(cfg));
}

}  // namespace

const char* to_string(TileKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

Result<TileKind> tile_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames)
    if (s == name) return Result<TileKind>::success(kind);
  return Result<TileKind>::failure("unknown tile kind '" + s + "'");
}

Buffering default_buffering(TileKind k) {
  switch (k) {
    case TileKind::Buffer:
    case TileKind::RsEncode:
    case TileKind::Witness:
    case TileKind::Controller:
    case TileKind::TcpRx:
    case TileKind::TcpTx:
      return Buffering::StoreAndForward;
    default:
      return Buffering::Streaming;
  }
}

Result<TopologyConfig> parse_topology_text(const std::string& text, const std::string& filename) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '<') return parse_xml_config(text, filename);
    return parse_json_config(text, filename);
  }
  return Fail::failure(filename + ": empty configuration");
}

Result<TopologyConfig> parse_topology_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Fail::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_topology_text(ss.str(), path);
}

std::vector<Diagnostic> validate_topology(const TopologyConfig& cfg) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Diagnostic::Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({Diagnostic::Severity::Warning, std::move(m)}); };

  if (cfg.width < 1 || cfg.height < 1 || cfg.width > 256 || cfg.height > 256) {
    error("mesh dimensions must be between 1x1 and 256x256, got " + std::to_string(cfg.width) + "x" +
          std::to_string(cfg.height));
    return out;
  }
  if (cfg.fifo_depth < 1 || cfg.fifo_depth > 1024)
    error("fifo_depth must be between 1 and 1024, got " + std::to_string(cfg.fifo_depth));
  if (cfg.pipeline_depth < 1 || cfg.pipeline_depth > 64)
    error("pipeline_depth must be between 1 and 64, got " + std::to_string(cfg.pipeline_depth));

  std::map<std::pair<int, int>, const TileDecl*> by_coord;
  std::map<std::string, const TileDecl*> by_name;
  for (const auto& t : cfg.tiles) {
    if (t.x < 0 || t.y < 0 || t.x >= cfg.width || t.y >= cfg.height)
      error("tile '" + t.name + "' at (" + std::to_string(t.x) + "," + std::to_string(t.y) +
            ") is outside the " + std::to_string(cfg.width) + "x" + std::to_string(cfg.height) + " mesh");
    if (auto [it, inserted] = by_name.emplace(t.name, &t); !inserted)
      error("duplicate tile name '" + t.name + "'");
    else if (auto [ct, cinserted] = by_coord.emplace(std::make_pair(t.x, t.y), &t); !cinserted)
      error("tiles '" + ct->second->name + "' and '" + t.name + "' share position (" +
            std::to_string(t.x) + "," + std::to_string(t.y) + ")");
  }

  std::set<std::string> referenced;
  for (const auto& t : cfg.tiles) {
    for (const auto& r : t.routes) {
      for (const auto& d : r.dests) {
        if (!by_name.count(d))
          error("tile '" + t.name + "' routes '" + r.key + "' to unknown tile '" + d + "'");
        else
          referenced.insert(d);
      }
      if (r.policy != "single" && r.policy != "round_robin" && r.policy != "flow_hash")
        error("tile '" + t.name + "' route '" + r.key + "' has unknown policy '" + r.policy + "'");
    }
    if (!t.routes.empty()) referenced.insert(t.name);
  }

  for (size_t ci = 0; ci < cfg.chains.size(); ++ci) {
    const auto& ch = cfg.chains[ci];
    std::string label = "chain #" + std::to_string(ci + 1);
    if (ch.tiles.size() < 2) error(label + " needs at least two tiles");
    if (ch.control && !cfg.control_noc)
      error(label + " is on the control plane but control_noc is disabled");
    std::set<std::string> seen;
    for (const auto& name : ch.tiles) {
      if (!by_name.count(name)) {
        error(label + " references unknown tile '" + name + "'");
        continue;
      }
      referenced.insert(name);
      if (!seen.insert(name).second)
        error(label + " visits tile '" + name + "' twice; duplicate the tile instead");
    }
    // A chain hop must be realizable by the upstream tile's next-hop table
    // (tiles without tables forward by chain and always qualify).
    for (size_t i = 0; i + 1 < ch.tiles.size(); ++i) {
      const TileDecl* a = cfg.tile(ch.tiles[i]);
      if (!a || a->routes.empty()) continue;
      bool realizable = false;
      for (const auto& r : a->routes)
        for (const auto& d : r.dests)
          if (d == ch.tiles[i + 1]) realizable = true;
      if (!realizable)
        warn(label + " hop '" + ch.tiles[i] + "' -> '" + ch.tiles[i + 1] +
             "' is not realizable by the next-hop table of '" + ch.tiles[i] + "'");
    }
  }

  for (const auto& t : cfg.tiles)
    if (t.kind != TileKind::Empty && !referenced.count(t.name) &&
        t.kind != TileKind::EthRx && t.kind != TileKind::EthTx)
      warn("tile '" + t.name + "' is unreachable: no chain or route references it");

  // Link usage summary over declared chains.
  std::set<noc::Link> used;
  for (const auto& ch : cfg.chains) {
    for (size_t i = 0; ch.tiles.size() >= 2 && i + 1 < ch.tiles.size(); ++i) {
      const TileDecl* a = cfg.tile(ch.tiles[i]);
      const TileDecl* b = cfg.tile(ch.tiles[i + 1]);
      if (!a || !b) continue;
      for (const auto& l : noc::link_sequence(a->coord(), b->coord())) used.insert(l);
    }
  }
  size_t total_links = 2 * (size_t(cfg.width) * (cfg.height - 1) + size_t(cfg.height) * (cfg.width - 1));
  if (!cfg.chains.empty() && used.size() < total_links)
    warn(std::to_string(total_links - used.size()) + " of " + std::to_string(total_links) +
         " mesh links are unused by the declared chains");

  return out;
}

}  // namespace meshstack::topo
