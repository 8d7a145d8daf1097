#pragma once

// Shot-cut segmentation by mean squared difference between consecutive frames.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "avt/media_core.hpp"

namespace avt {

struct SegmentBoundary {
  int fragment_index = 0;
  std::int64_t start_frame = 0;  // inclusive
  std::int64_t end_frame = 0;    // exclusive
  Rational start_time{};
  Rational end_time{};

  friend bool operator==(const SegmentBoundary&, const SegmentBoundary&) = default;
};

/// Mean over every channel position of the squared 8-bit difference.
inline double frame_msd(const FrameBuffer& a, const FrameBuffer& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorKind::DimensionMismatch, "frames differ in size");
  }
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int d = static_cast<int>(pa[i]) - static_cast<int>(pb[i]);
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum) / static_cast<double>(pa.size());
}

/// Streaming cut detector. Frames go in with push(); decided frames come out
/// of pop() in order, each flagged when it opens a new fragment.
///
/// With lookahead N > 0 the frame before a candidate cut is compared against
/// the next N+1 frames and the maximum difference is tested, so gradual fades
/// that never jump between neighbours still split. After a cut at k the
/// positions k+1..k+N are not eligible, which keeps one fade from producing a
/// run of one-frame fragments. Memory is bounded by N+2 frames.
class CutDetector {
 public:
  struct Decided {
    FrameBuffer frame;
    std::int64_t index = 0;
    bool starts_fragment = false;
  };

  explicit CutDetector(double cut_threshold, int lookahead = 0)
      : threshold_(cut_threshold), lookahead_(std::max(0, lookahead)) {}

  void push(FrameBuffer frame) {
    pending_.push_back(std::move(frame));
    while (static_cast<int>(pending_.size()) > lookahead_) decide_front();
  }

  /// Flushes the lookahead buffer at end of stream.
  void finish() {
    while (!pending_.empty()) decide_front();
  }

  std::optional<Decided> pop() {
    if (ready_.empty()) return std::nullopt;
    Decided d = std::move(ready_.front());
    ready_.pop_front();
    return d;
  }

 private:
  void decide_front() {
    const std::int64_t index = next_index_++;
    bool cut = false;
    if (!previous_) {
      cut = true;
    } else if (index > last_cut_ + lookahead_) {
      double worst = 0.0;
      for (const FrameBuffer& f : pending_) worst = std::max(worst, frame_msd(*previous_, f));
      cut = worst > threshold_;
    }
    if (cut) last_cut_ = index;
    FrameBuffer front = std::move(pending_.front());
    pending_.pop_front();
    previous_ = front;
    ready_.push_back(Decided{std::move(front), index, cut});
  }

  double threshold_;
  int lookahead_;
  std::deque<FrameBuffer> pending_;
  std::deque<Decided> ready_;
  std::optional<FrameBuffer> previous_;
  std::int64_t next_index_ = 0;
  std::int64_t last_cut_ = 0;
};

/// Splits an in-memory frame sequence into fragments that tile [0, n).
inline std::vector<SegmentBoundary> split_segments(std::span<const FrameBuffer> frames,
                                                   double cut_threshold, Rational fps = Rational(1),
                                                   int lookahead = 0) {
  std::vector<SegmentBoundary> out;
  if (frames.empty()) return out;
  CutDetector detector(cut_threshold, lookahead);
  std::vector<std::int64_t> starts;
  auto drain = [&] {
    while (auto d = detector.pop()) {
      if (d->starts_fragment) starts.push_back(d->index);
    }
  };
  for (const FrameBuffer& f : frames) {
    detector.push(f);
    drain();
  }
  detector.finish();
  drain();

  const auto n = static_cast<std::int64_t>(frames.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::int64_t end = i + 1 < starts.size() ? starts[i + 1] : n;
    out.push_back(SegmentBoundary{static_cast<int>(i), starts[i], end, frame_time(starts[i], fps),
                                  frame_time(end, fps)});
  }
  return out;
}

}  // namespace avt
