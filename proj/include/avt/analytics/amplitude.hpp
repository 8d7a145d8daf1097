#pragma once

// Amplitude-count matrix: for every timestamp of the one-second clips, how
// often each (quantized) instantaneous amplitude occurs across the dataset.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "avt/media_core.hpp"

namespace avt::analytics {

class AmplitudeMatrix {
 public:
  static constexpr std::uint32_t kLevels = 65536;
  /// Above this many bins the counts are held sparsely (exact mode).
  static constexpr std::uint32_t kDenseLimit = 4096;

  explicit AmplitudeMatrix(std::uint32_t amp_bins = 256) : bins_(amp_bins) {
    if (amp_bins == 0 || amp_bins > kLevels || kLevels % amp_bins != 0) {
      throw Error(ErrorKind::InvalidArgument, "amp_bins must divide 65536");
    }
    if (dense()) dense_.assign(static_cast<std::size_t>(bins_) * kClipSamples, 0);
  }

  std::uint32_t amp_bins() const { return bins_; }
  std::uint64_t clips() const { return clips_; }

  /// Bin of a sample: [-32768, 32767] cut into amp_bins equal intervals.
  std::uint32_t bin_of(std::int16_t sample) const {
    return static_cast<std::uint32_t>(static_cast<std::int32_t>(sample) + 32768) / (kLevels / bins_);
  }

  void add(const AudioClip& clip) {
    const auto s = clip.samples();
    for (std::size_t t = 0; t < kClipSamples; ++t) increment(bin_of(s[t]), t, 1);
    ++clips_;
  }

  void merge(const AmplitudeMatrix& other) {
    if (other.bins_ != bins_) throw Error(ErrorKind::InvalidArgument, "mismatched amplitude bins");
    if (dense()) {
      for (std::size_t i = 0; i < dense_.size(); ++i) dense_[i] += other.dense_[i];
    } else {
      for (const auto& [key, n] : other.sparse_) sparse_[key] += n;
    }
    clips_ += other.clips_;
  }

  std::uint64_t count(std::uint32_t bin, std::size_t t) const {
    if (dense()) return dense_[static_cast<std::size_t>(bin) * kClipSamples + t];
    const auto it = sparse_.find(key(bin, t));
    return it == sparse_.end() ? 0 : it->second;
  }

  std::uint64_t column_sum(std::size_t t) const {
    std::uint64_t sum = 0;
    if (dense()) {
      for (std::uint32_t b = 0; b < bins_; ++b) sum += count(b, t);
    } else {
      for (const auto& [k, n] : sparse_) {
        if (k % kClipSamples == t) sum += n;
      }
    }
    return sum;
  }

  std::uint64_t max_count() const {
    std::uint64_t m = 0;
    if (dense()) {
      for (std::uint64_t v : dense_) m = std::max(m, v);
    } else {
      for (const auto& [k, n] : sparse_) m = std::max(m, n);
    }
    return m;
  }

  friend bool operator==(const AmplitudeMatrix& a, const AmplitudeMatrix& b) {
    if (a.bins_ != b.bins_ || a.clips_ != b.clips_) return false;
    return a.dense() ? a.dense_ == b.dense_ : a.sparse_ == b.sparse_;
  }

 private:
  bool dense() const { return bins_ <= kDenseLimit; }
  static std::uint64_t key(std::uint32_t bin, std::size_t t) {
    return static_cast<std::uint64_t>(bin) * kClipSamples + t;
  }

  void increment(std::uint32_t bin, std::size_t t, std::uint64_t n) {
    if (dense()) {
      dense_[static_cast<std::size_t>(bin) * kClipSamples + t] += n;
    } else {
      sparse_[key(bin, t)] += n;
    }
  }

  std::uint32_t bins_;
  std::uint64_t clips_ = 0;
  std::vector<std::uint64_t> dense_;
  std::unordered_map<std::uint64_t, std::uint64_t> sparse_;
};

inline AmplitudeMatrix amplitude_matrix(std::span<const AudioClip> clips, std::uint32_t amp_bins = 256) {
  AmplitudeMatrix m(amp_bins);
  for (const AudioClip& c : clips) m.add(c);
  return m;
}

/// Row of the rendered image holding amplitude bin `bin`; high amplitudes at the top.
inline std::uint32_t render_row(const AmplitudeMatrix& m, std::uint32_t bin) { return m.amp_bins() - 1 - bin; }

/// Grey level 255 * (1 - count / max), rounded half up; white when max is 0.
inline std::uint8_t render_level(std::uint64_t count, std::uint64_t max_count) {
  if (max_count == 0) return 255;
  const unsigned __int128 num = static_cast<unsigned __int128>(255) * (max_count - count) * 2 + max_count;
  return static_cast<std::uint8_t>(num / (static_cast<unsigned __int128>(max_count) * 2));
}

/// Binary PGM (P5), 16000 columns by amp_bins rows.
template <typename Sink>
void render_matrix(const AmplitudeMatrix& m, Sink&& write) {
  const std::string header =
      "P5\n" + std::to_string(kClipSamples) + " " + std::to_string(m.amp_bins()) + "\n255\n";
  write(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(header.data()), header.size()));
  const std::uint64_t max = m.max_count();
  std::vector<std::uint8_t> row(kClipSamples);
  for (std::uint32_t r = 0; r < m.amp_bins(); ++r) {
    const std::uint32_t bin = m.amp_bins() - 1 - r;
    for (std::size_t t = 0; t < kClipSamples; ++t) row[t] = render_level(m.count(bin, t), max);
    write(std::span<const std::uint8_t>(row));
  }
}

inline std::vector<std::uint8_t> render_matrix(const AmplitudeMatrix& m) {
  std::vector<std::uint8_t> out;
  render_matrix(m, [&](std::span<const std::uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); });
  return out;
}

}  // namespace avt::analytics
