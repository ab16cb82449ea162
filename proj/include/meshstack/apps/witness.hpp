#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "meshstack/proto/bytes.hpp"
#include "meshstack/util/result.hpp"

namespace meshstack::apps {

// Replication witness: validates the leader and tracks operation order
// without executing operations. One witness instance per shard; transport
// is UDP, so every message may be lost, duplicated or reordered and the
// handler must stay safe under all of it.
struct WitnessMsg {
  enum class Kind : uint8_t {
    Prepare = 1,    // leader -> witness: {view, op_num, digest}
    PrepareOk = 2,  // witness -> leader: {view, op_num, witness_id}
    NewView = 3,    // leader -> witness: {view, leader_id, last_op}
    Reject = 4,     // witness -> leader: {view} — sender's view is stale
  };

  Kind kind = Kind::Prepare;
  uint32_t view = 0;
  uint32_t op_num = 0;    // Prepare / PrepareOk
  uint64_t digest = 0;    // Prepare
  uint8_t leader_id = 0;  // NewView
  uint32_t last_op = 0;   // NewView
  uint8_t witness_id = 0; // PrepareOk
};

// Fixed-layout big-endian records:
//   Prepare   = kind u8, view u32, op_num u32, digest u64   (17 bytes)
//   PrepareOk = kind u8, view u32, op_num u32, witness u8   (10 bytes)
//   NewView   = kind u8, view u32, leader u8, last_op u32   (10 bytes)
//   Reject    = kind u8, view u32                           (5 bytes)
std::vector<uint8_t> witness_encode(const WitnessMsg& m);
Result<WitnessMsg> witness_decode(proto::ByteView bytes);

struct WitnessState {
  uint32_t view = 0;
  uint32_t last_op = 0;
  uint8_t leader_id = 0;
  uint8_t witness_id = 0;

  // Bounded digest log; oldest op evicted past capacity.
  size_t digest_capacity = 1024;
  std::map<uint32_t, uint64_t> op_digests;

  uint64_t acked = 0;              // fresh PrepareOk
  uint64_t reacked = 0;            // idempotent PrepareOk for an old op
  uint64_t rejected = 0;           // stale-view Prepare answered with Reject
  uint64_t gap_dropped = 0;        // op_num beyond last_op+1, no reply
  uint64_t mismatch_dropped = 0;   // re-sent op with a different digest
  uint64_t future_view_dropped = 0;// Prepare for a view not yet adopted
  uint64_t view_adopts = 0;

  // Order-sensitive fold of the safety-relevant state (view, last_op,
  // digest log). Used by the shard-isolation checks.
  uint64_t state_hash() const;
};

// Advance the witness by one received message; the reply, if any, goes
// back to the sender. Handling rules:
//   Prepare, view == ours:
//     op == last_op+1      -> record digest, bump last_op, PrepareOk
//     op <= last_op        -> PrepareOk again iff the digest matches the
//                             recorded one (evicted digests re-ack freely);
//                             a different digest is dropped — acknowledging
//                             it would endorse two histories for one slot
//     op >  last_op+1      -> drop; the leader retransmits the gap
//   Prepare, view <  ours  -> Reject{our view}
//   Prepare, view >  ours  -> drop; a NewView must arrive first
//   NewView, view >  ours  -> adopt view/leader/last_op, clear digest log
//   NewView, view <= ours  -> drop (duplicate or stale)
//   PrepareOk / Reject     -> drop (not addressed to a witness)
std::optional<WitnessMsg> witness_handle(WitnessState& st, const WitnessMsg& in);

}  // namespace meshstack::apps
