#include "meshstack/apps/witness.hpp"

namespace meshstack::apps {

using proto::get_u32;
using proto::put_u32;

namespace {

void put_u64(uint8_t* p, uint64_t v) {
  put_u32(p, uint32_t(v >> 32));
  put_u32(p + 4, uint32_t(v));
}

uint64_t get_u64(const uint8_t* p) {
  return uint64_t(get_u32(p)) << 32 | get_u32(p + 4);
}

}  // namespace

std::vector<uint8_t> witness_encode(const WitnessMsg& m) {
  std::vector<uint8_t> out;
  switch (m.kind) {
    case WitnessMsg::Kind::Prepare:
      out.resize(17);
      out[0] = uint8_t(m.kind);
      put_u32(&out[1], m.view);
      put_u32(&out[5], m.op_num);
      put_u64(&out[9], m.digest);
      break;
    case WitnessMsg::Kind::PrepareOk:
      out.resize(10);
      out[0] = uint8_t(m.kind);
      put_u32(&out[1], m.view);
      put_u32(&out[5], m.op_num);
      out[9] = m.witness_id;
      break;
    case WitnessMsg::Kind::NewView:
      out.resize(10);
      out[0] = uint8_t(m.kind);
      put_u32(&out[1], m.view);
      out[5] = m.leader_id;
      put_u32(&out[6], m.last_op);
      break;
    case WitnessMsg::Kind::Reject:
      out.resize(5);
      out[0] = uint8_t(m.kind);
      put_u32(&out[1], m.view);
      break;
  }
  return out;
}

Result<WitnessMsg> witness_decode(proto::ByteView bytes) {
  using R = Result<WitnessMsg>;
  if (bytes.empty()) return R::failure("empty witness message");
  WitnessMsg m;
  switch (bytes[0]) {
    case uint8_t(WitnessMsg::Kind::Prepare):
      if (bytes.size() != 17) return R::failure("bad prepare length");
      m.kind = WitnessMsg::Kind::Prepare;
      m.view = get_u32(&bytes[1]);
      m.op_num = get_u32(&bytes[5]);
      m.digest = get_u64(&bytes[9]);
      return R::success(m);
    case uint8_t(WitnessMsg::Kind::PrepareOk):
      if (bytes.size() != 10) return R::failure("bad prepare_ok length");
      m.kind = WitnessMsg::Kind::PrepareOk;
      m.view = get_u32(&bytes[1]);
      m.op_num = get_u32(&bytes[5]);
      m.witness_id = bytes[9];
      return R::success(m);
    case uint8_t(WitnessMsg::Kind::NewView):
      if (bytes.size() != 10) return R::failure("bad new_view length");
      m.kind = WitnessMsg::Kind::NewView;
      m.view = get_u32(&bytes[1]);
      m.leader_id = bytes[5];
      m.last_op = get_u32(&bytes[6]);
      return R::success(m);
    case uint8_t(WitnessMsg::Kind::Reject):
      if (bytes.size() != 5) return R::failure("bad reject length");
      m.kind = WitnessMsg::Kind::Reject;
      m.view = get_u32(&bytes[1]);
      return R::success(m);
    default:
      return R::failure("unknown witness message kind");
  }
}

uint64_t WitnessState::state_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (i * 8)) & 0xFF;
      h *= 0x100000001b3ull;
    }
  };
  mix(view);
  mix(last_op);
  mix(leader_id);
  for (const auto& [op, digest] : op_digests) {
    mix(op);
    mix(digest);
  }
  return h;
}

std::optional<WitnessMsg> witness_handle(WitnessState& st,
                                         const WitnessMsg& in) {
  switch (in.kind) {
    case WitnessMsg::Kind::NewView: {
      if (in.view <= st.view) return std::nullopt;
      st.view = in.view;
      st.leader_id = in.leader_id;
      st.last_op = in.last_op;
      st.op_digests.clear();
      st.view_adopts++;
      return std::nullopt;
    }
    case WitnessMsg::Kind::Prepare:
      break;
    default:
      return std::nullopt;
  }

  if (in.view < st.view) {
    st.rejected++;
    WitnessMsg reject;
    reject.kind = WitnessMsg::Kind::Reject;
    reject.view = st.view;
    return reject;
  }
  if (in.view > st.view) {
    st.future_view_dropped++;
    return std::nullopt;
  }

  WitnessMsg ok;
  ok.kind = WitnessMsg::Kind::PrepareOk;
  ok.view = st.view;
  ok.op_num = in.op_num;
  ok.witness_id = st.witness_id;

  if (in.op_num == st.last_op + 1) {
    st.op_digests[in.op_num] = in.digest;
    if (st.op_digests.size() > st.digest_capacity)
      st.op_digests.erase(st.op_digests.begin());
    st.last_op = in.op_num;
    st.acked++;
    return ok;
  }
  if (in.op_num <= st.last_op) {
    auto it = st.op_digests.find(in.op_num);
    if (it != st.op_digests.end() && it->second != in.digest) {
      st.mismatch_dropped++;
      return std::nullopt;
    }
    st.reacked++;
    return ok;
  }
  st.gap_dropped++;
  return std::nullopt;
}

}  // namespace meshstack::apps
