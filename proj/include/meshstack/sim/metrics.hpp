#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace meshstack::sim {

struct LatencySummary {
  uint64_t count = 0;
  uint64_t min = 0;
  uint64_t max = 0;
  double mean = 0.0;
  uint64_t p50 = 0;
  uint64_t p95 = 0;
  uint64_t p99 = 0;
};

// Nearest-rank percentiles over cycle samples.
inline LatencySummary summarize_latencies(std::vector<uint64_t> samples) {
  LatencySummary s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.count = samples.size();
  s.min = samples.front();
  s.max = samples.back();
  double total = 0;
  for (uint64_t v : samples) total += double(v);
  s.mean = total / double(samples.size());
  auto rank = [&](double p) {
    auto r = size_t(std::ceil(p / 100.0 * double(samples.size())));
    return samples[std::clamp<size_t>(r, 1, samples.size()) - 1];
  };
  s.p50 = rank(50);
  s.p95 = rank(95);
  s.p99 = rank(99);
  return s;
}

// Links move 64-byte flits at 250 MHz: bytes * 8 bits / (cycles * 4 ns)
// simplifies to 2 * bytes / cycles in Gbps.
inline double goodput_gbps(uint64_t bytes, uint64_t cycles) {
  if (cycles == 0) return 0.0;
  return 2.0 * double(bytes) / double(cycles);
}

}  // namespace meshstack::sim
