#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace meshstack::noc {

// Mesh coordinates. x grows east, y grows south; (0,0) is the north-west
// corner. Coordinates fit in a byte because they are carried in the header
// flit's routing word.
struct Coord {
  uint8_t x = 0;
  uint8_t y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

enum class Direction : uint8_t { North = 0, East = 1, South = 2, West = 3, Local = 4 };

constexpr int kNumPorts = 5;

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::North: return "N";
    case Direction::East: return "E";
    case Direction::South: return "S";
    case Direction::West: return "W";
    case Direction::Local: return "L";
  }
  return "?";
}

inline std::string to_string(const Coord& c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

// Dimension-ordered routing: resolve x before y. Returns Local on arrival.
inline Direction xy_route_next(const Coord& here, const Coord& dst) {
  if (dst.x > here.x) return Direction::East;
  if (dst.x < here.x) return Direction::West;
  if (dst.y > here.y) return Direction::South;
  if (dst.y < here.y) return Direction::North;
  return Direction::Local;
}

inline Coord neighbor(const Coord& c, Direction d) {
  switch (d) {
    case Direction::North: return {c.x, static_cast<uint8_t>(c.y - 1)};
    case Direction::East: return {static_cast<uint8_t>(c.x + 1), c.y};
    case Direction::South: return {c.x, static_cast<uint8_t>(c.y + 1)};
    case Direction::West: return {static_cast<uint8_t>(c.x - 1), c.y};
    case Direction::Local: return c;
  }
  return c;
}

// A unidirectional physical channel between adjacent routers.
struct Link {
  Coord from;
  Coord to;

  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

inline std::string to_string(const Link& l) {
  Direction d = xy_route_next(l.from, l.to);
  return std::string(to_string(d)) + to_string(l.from) + "->" + to_string(l.to);
}

// Ordered list of links a message from src to dst acquires under XY routing.
inline std::vector<Link> link_sequence(const Coord& src, const Coord& dst) {
  std::vector<Link> seq;
  Coord at = src;
  while (at != dst) {
    Coord next = neighbor(at, xy_route_next(at, dst));
    seq.push_back(Link{at, next});
    at = next;
  }
  return seq;
}

}  // namespace meshstack::noc
