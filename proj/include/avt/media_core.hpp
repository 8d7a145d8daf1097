#pragma once

// Shared domain types: frames, one-second audio clips, filter thresholds and
// exact rational time.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avt/error.hpp"

namespace avt {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kClipSamples = 16000;

/// Non-negative rational number kept in lowest terms. Frame timestamps are
/// index/fps and stay exact until printed.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw Error(ErrorKind::InvalidArgument, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  constexpr double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend constexpr bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend constexpr bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

  std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
};

/// Seconds of frame `index` at frame rate `fps`.
constexpr Rational frame_time(std::int64_t index, Rational fps) {
  return Rational(index * fps.den, fps.num);
}

/// One decoded RGB24 frame, row-major, channel order R,G,B. Immutable once
/// built, so frames are shared freely between threads.
class FrameBuffer {
 public:
  FrameBuffer() = default;

  FrameBuffer(int width, int height, std::vector<std::uint8_t> pixels, Rational timestamp = {})
      : width_(width), height_(height), pixels_(std::move(pixels)), timestamp_(timestamp) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorKind::InvalidArgument, "frame dimensions must be positive");
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
      throw Error(ErrorKind::InvalidArgument,
                  "pixel buffer length " + std::to_string(pixels_.size()) + " does not match " +
                      std::to_string(width) + "x" + std::to_string(height) + "x3");
    }
  }

  static FrameBuffer filled(int width, int height, std::array<std::uint8_t, 3> rgb,
                            Rational timestamp = {}) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < px.size(); i += 3) {
      px[i] = rgb[0];
      px[i + 1] = rgb[1];
      px[i + 2] = rgb[2];
    }
    return FrameBuffer(width, height, std::move(px), timestamp);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Rational timestamp() const noexcept { return timestamp_; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int channel) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }

  FrameBuffer with_timestamp(Rational ts) const& { return FrameBuffer(width_, height_, pixels_, ts); }
  FrameBuffer with_timestamp(Rational ts) && {
    return FrameBuffer(width_, height_, std::move(pixels_), ts);
  }

  friend bool operator==(const FrameBuffer& a, const FrameBuffer& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.pixels_ == b.pixels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
  Rational timestamp_{};
};

/// Exactly one second of 16 kHz mono signed 16-bit audio.
class AudioClip {
 public:
  AudioClip() : samples_(kClipSamples, 0) {}

  explicit AudioClip(std::vector<std::int16_t> samples, Rational start_time = {})
      : samples_(std::move(samples)), start_time_(start_time) {
    if (samples_.size() != kClipSamples) {
      throw Error(ErrorKind::InvalidArgument,
                  "audio clip must hold exactly 16000 samples, got " + std::to_string(samples_.size()));
    }
  }

  explicit AudioClip(std::span<const std::int16_t> samples, Rational start_time = {})
      : AudioClip(std::vector<std::int16_t>(samples.begin(), samples.end()), start_time) {}

  std::span<const std::int16_t> samples() const noexcept { return samples_; }
  Rational start_time() const noexcept { return start_time_; }

  friend bool operator==(const AudioClip& a, const AudioClip& b) { return a.samples_ == b.samples_; }

 private:
  std::vector<std::int16_t> samples_;
  Rational start_time_{};
};

/// Thresholds of the extraction procedure.
struct FilterConfig {
  int border_threshold = 15;
  double cut_threshold = 90.0;
  int silence_amp = 100;
  double silence_dur = 0.5;
  double dark_mean = 10.0;
  int keep_every = 3;
  int out_size = 512;
  int min_crop_dim = 64;
  int fade_lookahead = 0;

  void validate() const {
    if (border_threshold < 0 || cut_threshold < 0 || silence_amp < 0 || silence_dur < 0 ||
        dark_mean < 0 || min_crop_dim < 0 || fade_lookahead < 0) {
      throw Error(ErrorKind::InvalidArgument, "filter thresholds must be non-negative");
    }
    if (keep_every < 1) throw Error(ErrorKind::InvalidArgument, "keep_every must be >= 1");
    if (out_size < 1) throw Error(ErrorKind::InvalidArgument, "out_size must be >= 1");
  }
};

inline double mean_pixel(const FrameBuffer& frame) {
  std::uint64_t sum = 0;
  for (std::uint8_t v : frame.pixels()) sum += v;
  return static_cast<double>(sum) / static_cast<double>(frame.pixels().size());
}

}  // namespace avt
