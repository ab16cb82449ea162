#include "meshstack/apps/tiles.hpp"

#include "meshstack/proto/bytes.hpp"

namespace meshstack::apps {

namespace {

std::optional<proto::PacketMeta> meta_of(const noc::NocMessage& in) {
  auto r = proto::PacketMeta::parse(in.metadata);
  if (!r.ok()) return std::nullopt;
  return *r;
}

// Request/response transform shared by the app tiles: address fields
// swapped, payload replaced (so any precomputed payload checksum dies).
proto::PacketMeta reply_meta(proto::PacketMeta m, size_t payload_len) {
  std::swap(m.eth_dst, m.eth_src);
  std::swap(m.ip_src, m.ip_dst);
  std::swap(m.src_port, m.dst_port);
  m.l4_len = uint16_t(payload_len);
  m.payload_sum16.reset();
  return m;
}

}  // namespace

std::vector<sim::OutMessage> RsEncodeLogic::on_message(
    const noc::NocMessage& in, uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  if (in.payload.size() < 4 + kRsDataBlocks ||
      (in.payload.size() - 4) % kRsDataBlocks != 0) {
    count("bad_request_drop");
    return {};
  }
  const size_t block = (in.payload.size() - 4) / kRsDataBlocks;
  std::vector<RsBlock> data(kRsDataBlocks);
  for (int k = 0; k < kRsDataBlocks; ++k) {
    auto start = in.payload.begin() + 4 + long(k * block);
    data[k].assign(start, start + long(block));
  }
  auto parity = RsCode::instance().encode(data);
  if (!parity.ok()) {
    count("encode_error_drop");
    return {};
  }

  std::vector<uint8_t> out(in.payload.begin(), in.payload.begin() + 4);
  for (const auto& p : *parity) out.insert(out.end(), p.begin(), p.end());

  auto hop = route(*meta);
  if (!hop) return {};
  count("encoded");
  count("encoded_bytes", in.payload.size() - 4);

  sim::OutMessage o;
  o.msg = sim::data_message(hop->at, reply_meta(*meta, out.size()),
                            std::move(out));
  o.after_tail = true;  // parity depends on every input byte
  const uint64_t rate = uint64_t(param_int("bytes_per_cycle", 8));
  const uint64_t compute = (in.payload.size() - 4 + rate - 1) / rate;
  o.extra_latency = compute;
  // The coder is a shared engine: hold the port so back-to-back requests
  // serialize at the compute rate instead of pipelining through it.
  const uint64_t units = 2 + (o.msg.payload.size() + 63) / 64;
  o.extra_busy = compute > units ? compute - units : 0;
  return {std::move(o)};
}

WitnessLogic::WitnessLogic(sim::TileEnv env) : sim::TileLogic(std::move(env)) {
  state_.witness_id = uint8_t(param_int("witness_id", 0));
  state_.digest_capacity = size_t(param_int("digest_capacity", 1024));
}

std::vector<sim::OutMessage> WitnessLogic::on_message(
    const noc::NocMessage& in, uint64_t) {
  auto meta = meta_of(in);
  if (!meta) {
    count("missing_meta_drop");
    return {};
  }
  auto msg = witness_decode(in.payload);
  if (!msg.ok()) {
    count("malformed_drop");
    return {};
  }
  auto reply = witness_handle(state_, *msg);
  count("handled");
  if (!reply) return {};

  auto bytes = witness_encode(*reply);
  auto hop = route(*meta);
  if (!hop) return {};
  count("replied");
  sim::OutMessage o;
  o.msg = sim::data_message(hop->at, reply_meta(*meta, bytes.size()),
                            std::move(bytes));
  o.after_tail = true;  // the verdict needs the whole record
  return {std::move(o)};
}

void register_app_tiles(sim::Engine::FactoryMap& map) {
  map[topo::TileKind::RsEncode] = [](sim::TileEnv env) {
    return std::make_unique<RsEncodeLogic>(std::move(env));
  };
  map[topo::TileKind::Witness] = [](sim::TileEnv env) {
    return std::make_unique<WitnessLogic>(std::move(env));
  };
}

}  // namespace meshstack::apps
