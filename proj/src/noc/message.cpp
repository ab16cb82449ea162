#include "meshstack/noc/message.hpp"

#include <cstring>

namespace meshstack::noc {

namespace {

void put_u32(uint8_t* p, uint32_t v) {
  p[0] = uint8_t(v >> 24);
  p[1] = uint8_t(v >> 16);
  p[2] = uint8_t(v >> 8);
  p[3] = uint8_t(v);
}

uint32_t get_u32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

void put_u16(uint8_t* p, uint16_t v) {
  p[0] = uint8_t(v >> 8);
  p[1] = uint8_t(v);
}

uint16_t get_u16(const uint8_t* p) { return uint16_t((p[0] << 8) | p[1]); }

// Copies a span of bytes into consecutive flits, zero-padding the tail flit.
void pack_region(std::vector<Flit>& out, const std::vector<uint8_t>& bytes, size_t width,
                 uint64_t message_id) {
  for (size_t off = 0; off < bytes.size(); off += width) {
    Flit f;
    f.kind = FlitKind::Body;
    f.message_id = message_id;
    size_t n = std::min(width, bytes.size() - off);
    std::memcpy(f.bytes.data(), bytes.data() + off, n);
    out.push_back(std::move(f));
  }
}

}  // namespace

Result<std::vector<Flit>> encode_message(const NocMessage& m, uint64_t message_id) {
  using R = Result<std::vector<Flit>>;
  if (m.payload.size() > kMaxPayloadBytes) return R::failure("payload exceeds 256 MiB limit");
  if (m.metadata.size() > 0xffff) return R::failure("metadata region exceeds 64 KiB");
  uint32_t body = body_flit_count(m);
  if (body > 0xffffff) return R::failure("body flit count exceeds header field");

  std::vector<Flit> flits;
  flits.reserve(1 + body);

  Flit hdr;
  hdr.kind = FlitKind::Header;
  hdr.message_id = message_id;
  hdr.bytes[0] = m.dst.x;
  hdr.bytes[1] = m.dst.y;
  hdr.bytes[2] = m.src.x;
  hdr.bytes[3] = m.src.y;
  hdr.bytes[4] = uint8_t(body >> 16);
  hdr.bytes[5] = uint8_t(body >> 8);
  hdr.bytes[6] = uint8_t(body);
  hdr.bytes[7] = m.control ? 1 : 0;
  if (!m.control) {
    put_u32(&hdr.bytes[8], static_cast<uint32_t>(m.payload.size()));
    put_u16(&hdr.bytes[12], static_cast<uint16_t>(m.metadata.size()));
  }
  flits.push_back(std::move(hdr));

  size_t w = flit_width(m.control);
  if (m.control) {
    Flit pre;
    pre.kind = FlitKind::Body;
    pre.message_id = message_id;
    put_u32(&pre.bytes[0], static_cast<uint32_t>(m.payload.size()));
    put_u16(&pre.bytes[4], static_cast<uint16_t>(m.metadata.size()));
    flits.push_back(std::move(pre));
  }
  pack_region(flits, m.metadata, w, message_id);
  pack_region(flits, m.payload, w, message_id);

  auto shared = std::make_shared<NocMessage>(m);
  for (uint32_t i = 0; i < flits.size(); ++i) {
    flits[i].index = i;
    flits[i].msg = shared;
  }
  return R::success(std::move(flits));
}

Result<NocMessage> decode_message(const std::vector<Flit>& flits) {
  using R = Result<NocMessage>;
  if (flits.empty()) return R::failure("empty flit sequence");
  if (flits[0].kind != FlitKind::Header) return R::failure("first flit is not a header");
  for (size_t i = 1; i < flits.size(); ++i)
    if (flits[i].kind != FlitKind::Body) return R::failure("header flit inside message body");

  HeaderFields h = read_header(flits[0]);
  if (flits.size() != size_t(1) + h.body_flit_count)
    return R::failure("body flit count mismatch: header says " + std::to_string(h.body_flit_count) +
                      ", got " + std::to_string(flits.size() - 1));

  NocMessage m;
  m.dst = h.dst;
  m.src = h.src;
  m.control = h.control;

  size_t w = flit_width(h.control);
  uint32_t payload_len;
  uint16_t meta_len;
  size_t body_at = 1;  // index of the first metadata flit
  if (h.control) {
    if (flits.size() < 2) return R::failure("control message missing length preamble");
    payload_len = get_u32(&flits[1].bytes[0]);
    meta_len = get_u16(&flits[1].bytes[4]);
    body_at = 2;
  } else {
    payload_len = get_u32(&flits[0].bytes[8]);
    meta_len = get_u16(&flits[0].bytes[12]);
  }
  if (payload_len > kMaxPayloadBytes) return R::failure("payload length exceeds 256 MiB limit");

  uint32_t meta_flits = static_cast<uint32_t>((meta_len + w - 1) / w);
  uint32_t data_flits = static_cast<uint32_t>((payload_len + w - 1) / w);
  uint32_t expect_body = (h.control ? 1 : 0) + meta_flits + data_flits;
  if (expect_body != h.body_flit_count)
    return R::failure("length fields disagree with body flit count");

  m.metadata.resize(meta_len);
  for (uint32_t i = 0; i < meta_len; ++i)
    m.metadata[i] = flits[body_at + i / w].bytes[i % w];
  size_t data_at = body_at + meta_flits;
  m.payload.resize(payload_len);
  for (uint32_t i = 0; i < payload_len; ++i)
    m.payload[i] = flits[data_at + i / w].bytes[i % w];
  return R::success(std::move(m));
}

}  // namespace meshstack::noc
