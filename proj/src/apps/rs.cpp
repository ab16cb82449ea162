#include "meshstack/apps/rs.hpp"

#include <cstdlib>

#include "meshstack/apps/gf256.hpp"

namespace meshstack::apps {

namespace {

using Row = RsCode::Row;
using Square = std::array<Row, kRsDataBlocks>;

}  // namespace

bool gf_invert8(const Square& m, Square& out) {
  const auto& gf = Gf256::instance();
  Square a = m;
  for (int r = 0; r < kRsDataBlocks; ++r) {
    out[r].fill(0);
    out[r][r] = 1;
  }
  for (int col = 0; col < kRsDataBlocks; ++col) {
    int pivot = -1;
    for (int r = col; r < kRsDataBlocks; ++r) {
      if (a[r][col] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) return false;
    std::swap(a[col], a[pivot]);
    std::swap(out[col], out[pivot]);
    uint8_t pinv = gf.inv(a[col][col]);
    for (int c = 0; c < kRsDataBlocks; ++c) {
      a[col][c] = gf.mul(a[col][c], pinv);
      out[col][c] = gf.mul(out[col][c], pinv);
    }
    for (int r = 0; r < kRsDataBlocks; ++r) {
      if (r == col || a[r][col] == 0) continue;
      uint8_t f = a[r][col];
      for (int c = 0; c < kRsDataBlocks; ++c) {
        a[r][c] ^= gf.mul(f, a[col][c]);
        out[r][c] ^= gf.mul(f, out[col][c]);
      }
    }
  }
  return true;
}

RsCode::RsCode() {
  const auto& gf = Gf256::instance();
  // Vandermonde rows over the evaluation points 0..9: V[r][c] = r^c.
  std::array<Row, kRsTotalBlocks> vand{};
  for (int r = 0; r < kRsTotalBlocks; ++r)
    for (int c = 0; c < kRsDataBlocks; ++c)
      vand[r][c] = gf.pow(uint8_t(r), unsigned(c));

  // Column-reduce: right-multiply by the inverse of the top square so rows
  // 0..7 become the identity. Row subsets stay invertible under this map.
  Square top{};
  for (int r = 0; r < kRsDataBlocks; ++r) top[r] = vand[r];
  Square top_inv{};
  if (!gf_invert8(top, top_inv)) std::abort();
  for (int r = 0; r < kRsTotalBlocks; ++r) {
    for (int c = 0; c < kRsDataBlocks; ++c) {
      uint8_t acc = 0;
      for (int k = 0; k < kRsDataBlocks; ++k)
        acc ^= gf.mul(vand[r][k], top_inv[k][c]);
      gen_[r][c] = acc;
    }
  }

  // MDS check: every way of erasing two shards must leave an invertible
  // 8x8 row selection. C(10,2) = 45 patterns.
  for (int e1 = 0; e1 < kRsTotalBlocks; ++e1) {
    for (int e2 = e1 + 1; e2 < kRsTotalBlocks; ++e2) {
      Square sub{};
      int n = 0;
      for (int r = 0; r < kRsTotalBlocks; ++r)
        if (r != e1 && r != e2) sub[n++] = gen_[r];
      Square scratch{};
      if (!gf_invert8(sub, scratch)) std::abort();
    }
  }
}

const RsCode& RsCode::instance() {
  static const RsCode code;
  return code;
}

Result<std::array<RsBlock, kRsParityBlocks>> RsCode::encode(
    const std::vector<RsBlock>& data) const {
  using Out = std::array<RsBlock, kRsParityBlocks>;
  if (int(data.size()) != kRsDataBlocks)
    return Result<Out>::failure("encode expects exactly 8 data blocks");
  const size_t len = data[0].size();
  for (const auto& b : data)
    if (b.size() != len) return Result<Out>::failure("unequal block lengths");

  const auto& gf = Gf256::instance();
  Out parity;
  for (int j = 0; j < kRsParityBlocks; ++j) {
    const Row& row = gen_[kRsDataBlocks + j];
    auto& out = parity[j];
    out.assign(len, 0);
    for (int k = 0; k < kRsDataBlocks; ++k) {
      const uint8_t coef = row[k];
      if (coef == 0) continue;
      const auto& src = data[k];
      for (size_t i = 0; i < len; ++i) out[i] ^= gf.mul(coef, src[i]);
    }
  }
  return Result<Out>::success(std::move(parity));
}

Result<std::vector<RsBlock>> rs_decode_oracle(
    const std::vector<std::pair<int, RsBlock>>& shards) {
  using Out = std::vector<RsBlock>;
  if (int(shards.size()) != kRsDataBlocks)
    return Result<Out>::failure("oracle needs exactly 8 shards");
  uint32_t seen = 0;
  const size_t len = shards[0].second.size();
  for (const auto& [idx, bytes] : shards) {
    if (idx < 0 || idx >= kRsTotalBlocks)
      return Result<Out>::failure("shard index out of range");
    if (seen & (1u << idx)) return Result<Out>::failure("duplicate shard index");
    seen |= 1u << idx;
    if (bytes.size() != len) return Result<Out>::failure("unequal block lengths");
  }

  const auto& gen = RsCode::instance().generator();
  Square sel{};
  for (int r = 0; r < kRsDataBlocks; ++r) sel[r] = gen[shards[r].first];
  Square inv{};
  if (!gf_invert8(sel, inv))
    return Result<Out>::failure("selected shard rows are singular");

  const auto& gf = Gf256::instance();
  Out data(kRsDataBlocks);
  for (int r = 0; r < kRsDataBlocks; ++r) {
    auto& out = data[r];
    out.assign(len, 0);
    for (int k = 0; k < kRsDataBlocks; ++k) {
      const uint8_t coef = inv[r][k];
      if (coef == 0) continue;
      const auto& src = shards[k].second;
      for (size_t i = 0; i < len; ++i) out[i] ^= gf.mul(coef, src[i]);
    }
  }
  return Result<Out>::success(std::move(data));
}

}  // namespace meshstack::apps
