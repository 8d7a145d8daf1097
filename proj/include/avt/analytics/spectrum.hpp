#pragma once

// Hann-windowed power spectrum of a one-second clip and mel-scale banding.
// The transform length is exactly 16000, so bin k is k Hz and the 0..8000 Hz
// range is bins 0..8000 inclusive.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "avt/media_core.hpp"

namespace avt::analytics {

inline constexpr std::size_t kSpectrumBins = kClipSamples / 2 + 1;  // 8001

/// Symmetric Hann taper, w[k] = 0.5 (1 - cos(2 pi k / (n - 1))).
inline std::vector<double> hann(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "hann window needs at least 2 points");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom));
  }
  return w;
}

namespace detail {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

/// One r2c plan of length 16000 shared by all threads. Planning is not
/// thread-safe in FFTW, execution with fresh aligned buffers is.
class ClipFft {
 public:
  static const ClipFft& instance() {
    static const ClipFft fft;
    return fft;
  }

  /// |X[f]|^2 for f = 0..8000 of the real input.
  std::vector<double> power(const std::vector<double>& input) const {
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * kClipSamples)));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * kSpectrumBins)));
    std::copy(input.begin(), input.end(), in.get());
    fftw_execute_dft_r2c(plan_, in.get(), out.get());
    std::vector<double> p(kSpectrumBins);
    for (std::size_t f = 0; f < kSpectrumBins; ++f) {
      const double re = out.get()[f][0];
      const double im = out.get()[f][1];
      p[f] = re * re + im * im;
    }
    return p;
  }

  ClipFft(const ClipFft&) = delete;
  ClipFft& operator=(const ClipFft&) = delete;

 private:
  ClipFft() {
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * kClipSamples)));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * kSpectrumBins)));
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(kClipSamples), in.get(), out.get(), FFTW_ESTIMATE);
    if (!plan_) throw Error(ErrorKind::InvalidArgument, "fftw planning failed");
  }

  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Windowed samples x[k] * w[k] as reals.
inline std::vector<double> windowed(const AudioClip& clip) {
  static const std::vector<double> window = hann(kClipSamples);
  std::vector<double> x(kClipSamples);
  const auto s = clip.samples();
  for (std::size_t k = 0; k < kClipSamples; ++k) x[k] = static_cast<double>(s[k]) * window[k];
  return x;
}

/// |DFT(x * hann)|^2 at 0..8000 Hz, no zero padding.
inline std::vector<double> power_spectrum(const AudioClip& clip) {
  return detail::ClipFft::instance().power(windowed(clip));
}

/// Mel bands evenly spaced between mel(0) = 0 and mel(f_max).
struct MelBinning {
  int n_bins = 32;
  double f_max = 8000.0;

  static double mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
  static double inverse_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

  /// n_bins + 1 edges in mel, edges[0] = 0, edges[n_bins] = mel(f_max).
  std::vector<double> mel_edges() const {
    std::vector<double> e(static_cast<std::size_t>(n_bins) + 1);
    const double top = mel(f_max);
    for (int i = 0; i <= n_bins; ++i) e[static_cast<std::size_t>(i)] = top * i / n_bins;
    return e;
  }

  /// Bin of frequency f; the upper edge f_max is clamped into the last bin.
  int bin_of(double f) const {
    if (!(f >= 0.0) || f > f_max) {
      throw Error(ErrorKind::OutOfRange, "frequency " + std::to_string(f) + " outside [0, f_max]");
    }
    const int b = static_cast<int>(std::floor(n_bins * mel(f) / mel(f_max)));
    return std::min(b, n_bins - 1);
  }

  /// Bin for every integer frequency 0..f_max.
  std::vector<int> table() const {
    std::vector<int> t(static_cast<std::size_t>(f_max) + 1);
    for (std::size_t f = 0; f < t.size(); ++f) t[f] = bin_of(static_cast<double>(f));
    return t;
  }
};

inline int mel_bin_of(double f, const MelBinning& binning = {}) { return binning.bin_of(f); }

/// Sums a 0..8000 Hz power spectrum into bands using a precomputed table.
inline std::vector<double> group_power(const std::vector<double>& spectrum, const std::vector<int>& table,
                                       int n_bins) {
  std::vector<double> grouped(static_cast<std::size_t>(n_bins), 0.0);
  for (std::size_t f = 0; f < spectrum.size() && f < table.size(); ++f) {
    grouped[static_cast<std::size_t>(table[f])] += spectrum[f];
  }
  return grouped;
}

inline std::vector<double> group_power(const std::vector<double>& spectrum, const MelBinning& binning) {
  return group_power(spectrum, binning.table(), binning.n_bins);
}

}  // namespace avt::analytics
