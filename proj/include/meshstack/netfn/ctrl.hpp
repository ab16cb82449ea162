#pragma once

#include <cstdint>
#include <vector>

#include "meshstack/util/result.hpp"

namespace meshstack::netfn {

// Control-plane table update, carried as the payload of a control-NoC
// message. Generations are strictly increasing; a tile applies an update
// only if its generation is newer than the last applied one, which makes
// redelivery idempotent.
struct ControlUpdate {
  uint32_t generation = 0;
  uint8_t op = kOpSet;  // kOpSet or kOpDelete
  uint32_t vip = 0;     // virtual service address
  uint32_t backend = 0; // rewritten destination (unused for delete)

  static constexpr uint8_t kOpSet = 1;
  static constexpr uint8_t kOpDelete = 2;

  std::vector<uint8_t> encode() const;
  static Result<ControlUpdate> decode(const std::vector<uint8_t>& bytes);
};

struct ControlAck {
  uint32_t generation = 0;
  uint8_t status = kOk;  // kOk, kStale

  static constexpr uint8_t kOk = 0;
  static constexpr uint8_t kStale = 1;

  std::vector<uint8_t> encode() const;
  static Result<ControlAck> decode(const std::vector<uint8_t>& bytes);
};

}  // namespace meshstack::netfn
