#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "avt/media_core.hpp"

namespace avt::test {

/// Sum of integer-frequency sinusoids, rounded to int16.
inline AudioClip sinusoids(const std::vector<double>& freqs, double amp, const std::vector<double>& phases = {}) {
  std::vector<std::int16_t> s(kClipSamples);
  for (std::size_t t = 0; t < kClipSamples; ++t) {
    double v = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const double ph = i < phases.size() ? phases[i] : 0.0;
      v += amp * std::sin(2.0 * std::numbers::pi * freqs[i] * static_cast<double>(t) / kSampleRate + ph);
    }
    s[t] = static_cast<std::int16_t>(std::lround(v));
  }
  return AudioClip(std::move(s));
}

/// One integer frequency at the mel centre of each of `bands` bands up to 8 kHz.
inline std::vector<double> mel_centre_frequencies(int bands) {
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto inv = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = mel(8000.0);
  std::vector<double> f;
  for (int b = 0; b < bands; ++b) f.push_back(std::round(inv(top * (b + 0.5) / bands)));
  return f;
}

/// Clips whose power is spread equally over the 32 mel bands.
inline std::vector<AudioClip> equal_mel_dataset(int clips, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const auto freqs = mel_centre_frequencies(32);
  std::vector<AudioClip> out;
  for (int c = 0; c < clips; ++c) {
    std::vector<double> ph(freqs.size());
    for (auto& p : ph) p = phase(rng);
    out.push_back(sinusoids(freqs, 900.0, ph));
  }
  return out;
}

}  // namespace avt::test
