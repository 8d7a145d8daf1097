#pragma once

// Acoustic Diversity Index: Shannon entropy (nats) of the aggregated mel-band
// power of a whole dataset, plus tertile classification of the result.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avt/analytics/spectrum.hpp"

namespace avt::analytics {

enum class AdiClass { Low, Medium, High };

inline std::string_view to_string(AdiClass c) {
  switch (c) {
    case AdiClass::Low: return "Low";
    case AdiClass::Medium: return "Medium";
    case AdiClass::High: return "High";
  }
  return "?";
}

/// H = -sum p ln p with 0 ln 0 = 0.
inline double shannon(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) throw Error(ErrorKind::NotNormalized, "negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::NotNormalized, "probabilities sum to " + std::to_string(total));
  }
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

namespace detail {

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace detail

/// Splits [0, ln n] into three equal parts, edges rounded to four decimals:
/// for 32 bands Low = [0, 1.1552], Medium = (1.1552, 2.3105), High = [2.3105, ln 32].
inline AdiClass classify_adi(double h, int n_bins = 32) {
  const double top = std::log(static_cast<double>(n_bins));
  if (!(h >= 0.0) || h > top + 1e-9) {
    throw Error(ErrorKind::OutOfRange, "ADI " + std::to_string(h) + " outside [0, ln " + std::to_string(n_bins) + "]");
  }
  const double low_edge = detail::round4(top / 3.0);
  const double high_edge = detail::round4(2.0 * top / 3.0);
  if (h <= low_edge) return AdiClass::Low;
  if (h < high_edge) return AdiClass::Medium;
  return AdiClass::High;
}

/// Exact sum of non-negative doubles in 2^-20 fixed point, so partial sums
/// over any split of the corpus merge to the identical total.
class FixedSum {
 public:
  static constexpr int kFractionBits = 20;

  void add(double v) { value_ += to_fixed(v); }
  void merge(const FixedSum& other) { value_ += other.value_; }
  __int128 raw() const { return value_; }
  long double value() const { return std::ldexp(static_cast<long double>(value_), -kFractionBits); }

  friend bool operator==(const FixedSum&, const FixedSum&) = default;

  static __int128 to_fixed(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "power must be finite and >= 0");
    const double scaled = std::ldexp(v, kFractionBits);
    if (scaled < 9.0e18) return static_cast<__int128>(std::llround(scaled));
    int exp = 0;
    const double mant = std::frexp(scaled, &exp);  // scaled = mant * 2^exp, exp > 53 here
    const auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
    return static_cast<__int128>(m) << (exp - 53);
  }

 private:
  __int128 value_ = 0;
};

/// Mergeable grouped-power accumulator.
class AdiAccumulator {
 public:
  explicit AdiAccumulator(MelBinning binning = {})
      : binning_(binning), table_(binning.table()), sums_(static_cast<std::size_t>(binning.n_bins)) {}

  void add(const AudioClip& clip) { add_grouped(group_power(power_spectrum(clip), table_, binning_.n_bins)); }

  void add_grouped(const std::vector<double>& grouped) {
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].add(grouped[i]);
    ++clips_;
  }

  void merge(const AdiAccumulator& other) {
    if (other.sums_.size() != sums_.size()) throw Error(ErrorKind::InvalidArgument, "mismatched band counts");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].merge(other.sums_[i]);
    clips_ += other.clips_;
  }

  const MelBinning& binning() const { return binning_; }
  std::uint64_t clips() const { return clips_; }
  const std::vector<FixedSum>& sums() const { return sums_; }

  friend bool operator==(const AdiAccumulator& a, const AdiAccumulator& b) {
    return a.clips_ == b.clips_ && a.sums_ == b.sums_;
  }

 private:
  MelBinning binning_;
  std::vector<int> table_;
  std::vector<FixedSum> sums_;
  std::uint64_t clips_ = 0;
};

struct AdiReport {
  std::vector<double> bin_power;
  std::vector<double> probabilities;
  double adi_value = 0.0;
  AdiClass classification = AdiClass::Low;
  std::uint64_t clips = 0;
};

/// Normalizes the accumulated band power and applies the Shannon index.
inline AdiReport finalize(const AdiAccumulator& acc) {
  __int128 total = 0;
  for (const FixedSum& s : acc.sums()) total += s.raw();
  if (total == 0) throw Error(ErrorKind::AllSilent, "total spectral power is zero");
  AdiReport r;
  r.clips = acc.clips();
  const long double denom = static_cast<long double>(total);
  for (const FixedSum& s : acc.sums()) {
    r.bin_power.push_back(static_cast<double>(s.value()));
    r.probabilities.push_back(static_cast<double>(static_cast<long double>(s.raw()) / denom));
  }
  r.adi_value = shannon(r.probabilities);
  r.classification = classify_adi(r.adi_value, acc.binning().n_bins);
  return r;
}

inline AdiReport adi(std::span<const AudioClip> clips, const MelBinning& binning = {}) {
  AdiAccumulator acc(binning);
  for (const AudioClip& c : clips) acc.add(c);
  return finalize(acc);
}

}  // namespace avt::analytics
