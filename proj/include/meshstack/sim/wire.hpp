#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

namespace meshstack::sim {

inline constexpr size_t kWireWordBytes = 64;

inline size_t wire_word_count(size_t frame_bytes) {
  return frame_bytes == 0 ? 1 : (frame_bytes + kWireWordBytes - 1) / kWireWordBytes;
}

// Ingress direction of an external Ethernet attachment. A queued frame
// streams to the receiver as 64-byte words, one per cycle, back to back,
// with no backpressure: the receiver keeps up or sheds load, exactly like
// a physical link running at the router clock.
class WireModel {
 public:
  // Called once per delivered word. The whole frame accompanies every call
  // so the receiver can parse once; word_index says how much has really
  // arrived.
  using WordFn = std::function<void(uint64_t cycle, const std::vector<uint8_t>& frame,
                                    size_t word_index, size_t word_count)>;
  // Applied when a frame is queued; may flip bits, or return false to drop
  // the frame entirely. Used for fault injection.
  using FaultFn = std::function<bool(std::vector<uint8_t>& frame)>;

  void on_word(WordFn fn) { word_fn_ = std::move(fn); }
  void set_fault(FaultFn fn) { fault_fn_ = std::move(fn); }

  void send(std::vector<uint8_t> frame) {
    if (fault_fn_ && !fault_fn_(frame)) {
      ++frames_dropped;
      return;
    }
    ++frames_queued;
    queue_.push_back(std::move(frame));
  }

  void advance(uint64_t cycle) {
    if (queue_.empty()) return;
    const auto& frame = queue_.front();
    size_t count = wire_word_count(frame.size());
    if (word_fn_) word_fn_(cycle, frame, word_, count);
    if (++word_ >= count) {
      queue_.pop_front();
      word_ = 0;
      ++frames_delivered;
    }
  }

  bool idle() const { return queue_.empty(); }
  size_t backlog_frames() const { return queue_.size(); }

  uint64_t frames_queued = 0;
  uint64_t frames_delivered = 0;
  uint64_t frames_dropped = 0;

 private:
  std::deque<std::vector<uint8_t>> queue_;
  size_t word_ = 0;
  WordFn word_fn_;
  FaultFn fault_fn_;
};

}  // namespace meshstack::sim
