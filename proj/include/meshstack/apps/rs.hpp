#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "meshstack/util/result.hpp"

namespace meshstack::apps {

inline constexpr int kRsDataBlocks = 8;
inline constexpr int kRsParityBlocks = 2;
inline constexpr int kRsTotalBlocks = kRsDataBlocks + kRsParityBlocks;

using RsBlock = std::vector<uint8_t>;

// Systematic (8,2) Reed-Solomon code over GF(2^8). The 10x8 generator is a
// Vandermonde matrix column-reduced so rows 0..7 form the identity; shard r
// of a stripe is row r of generator x data. Construction verifies the MDS
// property (all 45 eight-row submatrices invertible) and refuses to hand out
// an instance otherwise.
class RsCode {
 public:
  using Row = std::array<uint8_t, kRsDataBlocks>;

  const std::array<Row, kRsTotalBlocks>& generator() const { return gen_; }

  // Parity shards for 8 equal-length data blocks.
  Result<std::array<RsBlock, kRsParityBlocks>> encode(
      const std::vector<RsBlock>& data) const;

  static const RsCode& instance();

 private:
  RsCode();
  std::array<Row, kRsTotalBlocks> gen_{};
};

// Test oracle: reconstruct the 8 data blocks from any 8 of the 10 shards,
// by inverting the corresponding generator rows. Input is (shard index,
// shard bytes) pairs; indices must be distinct and in [0, 10).
Result<std::vector<RsBlock>> rs_decode_oracle(
    const std::vector<std::pair<int, RsBlock>>& shards);

// Gauss-Jordan inversion over GF(2^8); empty result if singular.
// Exposed so tests can sweep all 45 submatrices directly.
bool gf_invert8(const std::array<RsCode::Row, kRsDataBlocks>& m,
                std::array<RsCode::Row, kRsDataBlocks>& out);

}  // namespace meshstack::apps
