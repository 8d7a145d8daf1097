#pragma once

// Per-fragment pair extraction: one-second audio windows, the frame nearest
// each window's centre, silence and darkness filters, positional subsampling
// and the final square crop + rescale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avt/media_core.hpp"

namespace avt {

struct PairRecord {
  std::int64_t global_id = 0;
  std::string video_id;
  int fragment_index = 0;
  int window_index = 0;
  FrameBuffer image;
  AudioClip audio;
};

/// Consecutive non-overlapping one-second clips starting at the first sample;
/// a trailing remainder shorter than a second is dropped. `first_sample` is
/// the absolute index of samples[0] and only feeds the clip start times.
inline std::vector<AudioClip> window_audio(std::span<const std::int16_t> samples,
                                           std::int64_t first_sample = 0) {
  std::vector<AudioClip> clips;
  const std::size_t count = samples.size() / kClipSamples;
  clips.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    clips.emplace_back(samples.subspan(j * kClipSamples, kClipSamples),
                       Rational(first_sample + static_cast<std::int64_t>(j * kClipSamples), kSampleRate));
  }
  return clips;
}

/// True when frame `k` at `fps` is presented inside samples [start, start+16000).
inline bool frame_in_window(std::int64_t k, Rational fps, std::int64_t window_start) {
  const __int128 pos = static_cast<__int128>(k) * fps.den * kSampleRate;  // frame time * num
  return static_cast<__int128>(window_start) * fps.num <= pos &&
         pos < static_cast<__int128>(window_start + static_cast<std::int64_t>(kClipSamples)) * fps.num;
}

/// Index of the frame presented nearest to the centre of the window starting
/// at absolute sample `window_start`, restricted to frames [first, end) that
/// fall inside the window. Ties go to the earlier frame. Returns nullopt when
/// no such frame exists.
inline std::optional<std::int64_t> middle_frame_index(std::int64_t window_start, Rational fps,
                                                      std::int64_t first, std::int64_t end) {
  const __int128 centre = static_cast<__int128>(window_start + static_cast<std::int64_t>(kClipSamples / 2)) * fps.num;
  const __int128 step = static_cast<__int128>(fps.den) * kSampleRate;
  if (first >= end) return std::nullopt;
  const auto lower = static_cast<std::int64_t>(centre / step);
  // Nearest frames below and above the centre, clamped into [first, end).
  const std::int64_t below = std::clamp(lower, first, end - 1);
  const std::int64_t above = std::clamp(lower + 1, first, end - 1);
  std::optional<std::int64_t> best;
  __int128 best_dist = 0;
  for (std::int64_t k : {below, above}) {
    if (!frame_in_window(k, fps, window_start)) continue;
    const __int128 pos = static_cast<__int128>(k) * step;
    const __int128 dist = pos > centre ? pos - centre : centre - pos;
    if (!best || dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

/// Frame nearest the centre of the window. `fragment` holds consecutive
/// frames beginning at absolute index `first_index`.
inline const FrameBuffer& middle_frame(std::span<const FrameBuffer> fragment, std::int64_t first_index,
                                       Rational fps, std::int64_t window_start) {
  const auto k = middle_frame_index(window_start, fps, first_index,
                                    first_index + static_cast<std::int64_t>(fragment.size()));
  if (!k) throw Error(ErrorKind::NoFrameInWindow, "no fragment frame inside the audio window");
  return fragment[static_cast<std::size_t>(*k - first_index)];
}

/// Samples needed for a silent run of `silence_dur` seconds.
inline std::size_t silence_run_samples(double silence_dur) {
  return static_cast<std::size_t>(std::ceil(silence_dur * kSampleRate - 1e-9));
}

/// True iff some run of at least silence_dur seconds has no |x| > silence_amp.
inline bool is_silent(const AudioClip& clip, int silence_amp, double silence_dur) {
  const std::size_t needed = silence_run_samples(silence_dur);
  if (needed == 0) return true;
  std::size_t run = 0;
  for (std::int16_t s : clip.samples()) {
    if (std::abs(static_cast<int>(s)) > silence_amp) {
      run = 0;
    } else if (++run >= needed) {
      return true;
    }
  }
  return false;
}

/// Darkness test: the mean pixel does not surpass `dark_mean`.
inline bool is_dark(const FrameBuffer& image, double dark_mean) { return mean_pixel(image) <= dark_mean; }

/// Keeps positions 0, keep_every, 2*keep_every, ...
template <typename T>
std::vector<T> subsample(std::vector<T> items, int keep_every) {
  if (keep_every < 1) throw Error(ErrorKind::InvalidArgument, "keep_every must be >= 1");
  std::vector<T> kept;
  kept.reserve((items.size() + keep_every - 1) / keep_every);
  for (std::size_t i = 0; i < items.size(); i += static_cast<std::size_t>(keep_every)) {
    kept.push_back(std::move(items[i]));
  }
  return kept;
}

/// Square crop of the central min(w, h) region.
struct SquareCrop {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
};

inline SquareCrop centre_square(int width, int height) {
  const int side = std::min(width, height);
  return SquareCrop{(width - side) / 2, (height - side) / 2, side};
}

/// Centre square crop followed by a bilinear rescale to out_size x out_size.
/// Sample positions use pixel centres, so a same-size rescale is the identity.
inline FrameBuffer center_crop_resize(const FrameBuffer& frame, int out_size) {
  if (out_size < 1) throw Error(ErrorKind::InvalidArgument, "out_size must be >= 1");
  const SquareCrop sq = centre_square(frame.width(), frame.height());
  const double scale = static_cast<double>(sq.side) / out_size;

  struct Tap {
    int i0, i1;
    double f;
  };
  std::vector<Tap> taps(static_cast<std::size_t>(out_size));
  for (int o = 0; o < out_size; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(sq.side - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, sq.side - 1);
    taps[static_cast<std::size_t>(o)] = Tap{i0, i1, s - i0};
  }

  std::vector<std::uint8_t> out(static_cast<std::size_t>(out_size) * out_size * 3);
  std::size_t w = 0;
  for (int oy = 0; oy < out_size; ++oy) {
    const Tap& ty = taps[static_cast<std::size_t>(oy)];
    for (int ox = 0; ox < out_size; ++ox) {
      const Tap& tx = taps[static_cast<std::size_t>(ox)];
      for (int c = 0; c < 3; ++c) {
        const double p00 = frame.at(sq.x0 + tx.i0, sq.y0 + ty.i0, c);
        const double p01 = frame.at(sq.x0 + tx.i1, sq.y0 + ty.i0, c);
        const double p10 = frame.at(sq.x0 + tx.i0, sq.y0 + ty.i1, c);
        const double p11 = frame.at(sq.x0 + tx.i1, sq.y0 + ty.i1, c);
        const double top = p00 + (p01 - p00) * tx.f;
        const double bottom = p10 + (p11 - p10) * tx.f;
        const double v = top + (bottom - top) * ty.f;
        out[w++] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return FrameBuffer(out_size, out_size, std::move(out), frame.timestamp());
}

}  // namespace avt
