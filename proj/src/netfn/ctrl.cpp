#include "meshstack/netfn/ctrl.hpp"

#include "meshstack/proto/bytes.hpp"

namespace meshstack::netfn {

using proto::get_u32;
using proto::put_u32;

std::vector<uint8_t> ControlUpdate::encode() const {
  std::vector<uint8_t> out(13);
  put_u32(out.data(), generation);
  out[4] = op;
  put_u32(out.data() + 5, vip);
  put_u32(out.data() + 9, backend);
  return out;
}

Result<ControlUpdate> ControlUpdate::decode(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 13) return Result<ControlUpdate>::failure("control update truncated");
  ControlUpdate u;
  u.generation = get_u32(bytes.data());
  u.op = bytes[4];
  u.vip = get_u32(bytes.data() + 5);
  u.backend = get_u32(bytes.data() + 9);
  if (u.op != kOpSet && u.op != kOpDelete)
    return Result<ControlUpdate>::failure("control update has unknown op");
  return Result<ControlUpdate>::success(u);
}

std::vector<uint8_t> ControlAck::encode() const {
  std::vector<uint8_t> out(5);
  put_u32(out.data(), generation);
  out[4] = status;
  return out;
}

Result<ControlAck> ControlAck::decode(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 5) return Result<ControlAck>::failure("control ack truncated");
  ControlAck a;
  a.generation = get_u32(bytes.data());
  a.status = bytes[4];
  return Result<ControlAck>::success(a);
}

}  // namespace meshstack::netfn
