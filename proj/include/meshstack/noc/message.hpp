#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "meshstack/noc/coord.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::noc {

// Flit storage is always 64 bytes; the control plane only serializes the
// first 8 of them (its links are 64 bits wide).
constexpr size_t kFlitBytes = 64;
constexpr size_t kControlFlitBytes = 8;
constexpr uint64_t kMaxPayloadBytes = 256ull << 20;

enum class FlitKind : uint8_t { Header = 0, Body = 1 };

struct NocMessage {
  Coord dst;
  Coord src;
  bool control = false;             // which plane the message belongs to
  std::vector<uint8_t> metadata;    // parsed-field region, rides in body flits
  std::vector<uint8_t> payload;
};

struct Flit {
  FlitKind kind = FlitKind::Body;
  std::array<uint8_t, kFlitBytes> bytes{};
  // Simulator-side annotations; not part of the wire image.
  uint64_t message_id = 0;
  uint32_t index = 0;       // 0 = header flit
  uint64_t ready_cycle = 0; // earliest cycle this flit may advance (pipelining)
  std::shared_ptr<const NocMessage> msg;
};

// Header flit layout. The routing word occupies the top 64 bits; routers look
// at nothing else.
//   byte 0     dst.x
//   byte 1     dst.y
//   byte 2     src.x
//   byte 3     src.y
//   bytes 4-6  body flit count, big-endian u24
//   byte 7     flags (bit0 = control plane)
// Wide (64-byte) flits keep the length fields in the same flit:
//   bytes 8-11  payload length, big-endian u32
//   bytes 12-13 metadata length, big-endian u16
// Narrow (8-byte) control flits have no spare header room, so the first body
// flit is a length preamble: payload length u32, metadata length u16, zeros.

struct HeaderFields {
  Coord dst;
  Coord src;
  uint32_t body_flit_count = 0;
  bool control = false;
};

inline HeaderFields read_header(const Flit& f) {
  HeaderFields h;
  h.dst = {f.bytes[0], f.bytes[1]};
  h.src = {f.bytes[2], f.bytes[3]};
  h.body_flit_count = (uint32_t(f.bytes[4]) << 16) | (uint32_t(f.bytes[5]) << 8) | f.bytes[6];
  h.control = (f.bytes[7] & 1u) != 0;
  return h;
}

inline size_t flit_width(bool control) { return control ? kControlFlitBytes : kFlitBytes; }

inline uint32_t data_flit_count(const NocMessage& m) {
  size_t w = flit_width(m.control);
  return static_cast<uint32_t>((m.payload.size() + w - 1) / w);
}

inline uint32_t metadata_flit_count(const NocMessage& m) {
  size_t w = flit_width(m.control);
  return static_cast<uint32_t>((m.metadata.size() + w - 1) / w);
}

// Body flits of a message: [preamble (control plane only)] [metadata] [data].
inline uint32_t body_flit_count(const NocMessage& m) {
  return (m.control ? 1 : 0) + metadata_flit_count(m) + data_flit_count(m);
}

inline uint32_t total_flit_count(const NocMessage& m) { return 1 + body_flit_count(m); }

// Serializes a message into flits. message_id tags every flit for tracing.
Result<std::vector<Flit>> encode_message(const NocMessage& m, uint64_t message_id);

// Reconstructs a message from the wire image alone (the flits' byte arrays;
// the simulator-side msg pointer is deliberately ignored). Rejects malformed
// headers, wrong flit counts, and length/flit-count mismatches.
Result<NocMessage> decode_message(const std::vector<Flit>& flits);

}  // namespace meshstack::noc
