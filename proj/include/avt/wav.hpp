#pragma once

// Canonical 44-byte RIFF/WAVE: PCM, mono, 16 kHz, 16-bit little-endian,
// exactly 16000 samples. Anything else in the pair store is a foreign file.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "avt/media_core.hpp"

namespace avt {

inline constexpr std::size_t kWavHeaderBytes = 44;
inline constexpr std::size_t kWavFileBytes = kWavHeaderBytes + kClipSamples * 2;

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

inline std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char (&tag)[5]) {
  return b[at] == tag[0] && b[at + 1] == tag[1] && b[at + 2] == tag[2] && b[at + 3] == tag[3];
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  constexpr std::uint32_t data_bytes = kClipSamples * 2;
  std::vector<std::uint8_t> out;
  out.reserve(kWavFileBytes);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 36 + data_bytes);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);                    // PCM
  detail::put_u16(out, 1);                    // channels
  detail::put_u32(out, kSampleRate);          // sample rate
  detail::put_u32(out, kSampleRate * 2);      // byte rate
  detail::put_u16(out, 2);                    // block align
  detail::put_u16(out, 16);                   // bits per sample
  detail::put_tag(out, "data");
  detail::put_u32(out, data_bytes);
  for (std::int16_t s : clip.samples()) detail::put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

/// Accepts only the canonical layout written by encode_wav. Throws
/// MalformedWav for broken structure and WrongFormat for well-formed files
/// with other audio parameters.
inline AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  using detail::get_u16;
  using detail::get_u32;
  if (bytes.size() < kWavHeaderBytes) throw Error(ErrorKind::MalformedWav, "shorter than a WAV header");
  if (!detail::tag_is(bytes, 0, "RIFF") || !detail::tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorKind::MalformedWav, "missing RIFF/WAVE tags");
  }
  if (!detail::tag_is(bytes, 12, "fmt ") || get_u32(bytes, 16) != 16) {
    throw Error(ErrorKind::MalformedWav, "expected a 16-byte fmt chunk at offset 12");
  }
  if (!detail::tag_is(bytes, 36, "data")) throw Error(ErrorKind::MalformedWav, "expected data chunk at offset 36");

  const std::uint16_t format = get_u16(bytes, 20);
  const std::uint16_t channels = get_u16(bytes, 22);
  const std::uint32_t rate = get_u32(bytes, 24);
  const std::uint16_t bits = get_u16(bytes, 34);
  if (format != 1) throw Error(ErrorKind::WrongFormat, "format tag " + std::to_string(format) + " is not PCM");
  if (channels != 1) throw Error(ErrorKind::WrongFormat, std::to_string(channels) + " channels, expected mono");
  if (rate != static_cast<std::uint32_t>(kSampleRate)) {
    throw Error(ErrorKind::WrongFormat, "sample rate " + std::to_string(rate) + ", expected 16000");
  }
  if (bits != 16) throw Error(ErrorKind::WrongFormat, std::to_string(bits) + " bits per sample, expected 16");

  const std::uint32_t data_bytes = get_u32(bytes, 40);
  if (bytes.size() < kWavHeaderBytes + data_bytes) throw Error(ErrorKind::MalformedWav, "truncated data chunk");
  if (data_bytes != kClipSamples * 2) {
    throw Error(ErrorKind::WrongFormat, std::to_string(data_bytes / 2) + " samples, expected 16000");
  }
  std::vector<std::int16_t> samples(kClipSamples);
  for (std::size_t i = 0; i < kClipSamples; ++i) {
    samples[i] = static_cast<std::int16_t>(get_u16(bytes, kWavHeaderBytes + 2 * i));
  }
  return AudioClip(std::move(samples));
}

}  // namespace avt
