#pragma once

// Decoder contract. An external process is asked three things about a video:
//
//   probe  ->  key=value lines (ffprobe "default" writer layout):
//              codec_type=video|audio opens a stream block, followed by
//              width=, height=, r_frame_rate=num/den for video streams;
//              duration= gives the container duration in seconds.
//   video  ->  headerless RGB24 frames at native resolution on stdout.
//   audio  ->  headerless s16le mono 16 kHz PCM on stdout.

#include <cstdlib>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "avt/media_core.hpp"
#include "avt/subprocess.hpp"

namespace avt {

struct VideoMeta {
  std::string video_id;
  Rational fps{1};
  double duration = 0.0;
  int src_width = 0;
  int src_height = 0;

  /// Nominal frame count round(duration * fps).
  std::int64_t expected_frames() const { return std::llround(duration * fps.to_double()); }
};

struct DecoderSpec {
  std::string probe_cmd =
      "ffprobe -v error -show_entries stream=codec_type,width,height,r_frame_rate:format=duration "
      "-of default=noprint_wrappers=1 {input}";
  std::string video_cmd =
      "ffmpeg -v error -nostdin -i {input} -map 0:v:0 -vsync passthrough -f rawvideo -pix_fmt rgb24 -";
  std::string audio_cmd =
      "ffmpeg -v error -nostdin -i {input} -map 0:a:0 -f s16le -acodec pcm_s16le -ac 1 -ar 16000 -";
};

/// Parses "30", "30/1", "30000/1001" or "29.97".
inline std::optional<Rational> parse_rate(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const long long n = std::stoll(text.substr(0, slash));
      const long long d = std::stoll(text.substr(slash + 1));
      if (n <= 0 || d <= 0) return std::nullopt;
      return Rational(n, d);
    }
    const double v = std::stod(text);
    if (!(v > 0)) return std::nullopt;
    const auto scaled = std::llround(v * 1000.0);
    return Rational(scaled, 1000);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

/// Interprets probe output. Throws UnreadableMedia when the video or audio
/// stream is missing or the video parameters are unusable.
inline VideoMeta parse_probe_output(const std::string& text, const std::string& video_id) {
  VideoMeta meta;
  meta.video_id = video_id;
  bool have_video = false;
  bool have_audio = false;
  bool in_video = false;
  bool video_done = false;
  std::optional<Rational> fps;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "codec_type") {
      if (in_video) video_done = true;
      in_video = value == "video" && !video_done;
      have_video |= value == "video";
      have_audio |= value == "audio";
    } else if (in_video && key == "width") {
      meta.src_width = std::atoi(value.c_str());
    } else if (in_video && key == "height") {
      meta.src_height = std::atoi(value.c_str());
    } else if (in_video && key == "r_frame_rate") {
      fps = parse_rate(value);
    } else if (key == "duration") {
      char* end = nullptr;
      const double d = std::strtod(value.c_str(), &end);
      if (end != value.c_str() && d >= 0) meta.duration = d;
    }
  }
  if (!have_video) throw Error(ErrorKind::UnreadableMedia, video_id + ": no video stream");
  if (!have_audio) throw Error(ErrorKind::UnreadableMedia, video_id + ": no audio stream");
  if (!fps) throw Error(ErrorKind::UnreadableMedia, video_id + ": missing or invalid frame rate");
  if (meta.src_width <= 0 || meta.src_height <= 0) {
    throw Error(ErrorKind::UnreadableMedia, video_id + ": invalid frame dimensions");
  }
  meta.fps = *fps;
  return meta;
}

inline VideoMeta probe(const std::string& path, const DecoderSpec& spec, const std::string& video_id) {
  const auto [code, out] = run_capture(expand_template(spec.probe_cmd, {{"input", path}}));
  if (code != 0) {
    throw Error(ErrorKind::UnreadableMedia, video_id + ": probe exited with status " + std::to_string(code));
  }
  return parse_probe_output(out, video_id);
}

/// Pull-based frame reader over the decoder's video channel. Frame k carries
/// timestamp k/fps. The pipe is the bounded buffer.
class FrameStream {
 public:
  FrameStream(const std::string& path, const DecoderSpec& spec, const VideoMeta& meta)
      : meta_(meta),
        proc_(std::make_unique<Subprocess>(expand_template(spec.video_cmd, {{"input", path}}),
                                           Subprocess::Options{false, true, true, {}})),
        frame_bytes_(static_cast<std::size_t>(meta.src_width) * meta.src_height * 3) {}

  /// Next frame, or nullopt at a clean end of stream. Throws DecoderCrash on a
  /// nonzero decoder exit or a truncated trailing frame.
  std::optional<FrameBuffer> next() {
    if (done_) return std::nullopt;
    std::vector<std::uint8_t> buf(frame_bytes_);
    const std::size_t got = proc_->read_full(buf);
    if (got == frame_bytes_) {
      return FrameBuffer(meta_.src_width, meta_.src_height, std::move(buf), frame_time(index_++, meta_.fps));
    }
    done_ = true;
    const int code = proc_->wait();
    if (code != 0) {
      throw Error(ErrorKind::DecoderCrash,
                  meta_.video_id + ": video decoder exited with status " + std::to_string(code));
    }
    if (got != 0) {
      throw Error(ErrorKind::DecoderCrash, meta_.video_id + ": truncated trailing frame");
    }
    return std::nullopt;
  }

  /// Stops reading early; the decoder is terminated.
  void abandon() {
    done_ = true;
    proc_->close_stdout();
    proc_->kill();
    proc_->wait();
  }

  std::int64_t frames_read() const { return index_; }

 private:
  VideoMeta meta_;
  std::unique_ptr<Subprocess> proc_;
  std::size_t frame_bytes_;
  std::int64_t index_ = 0;
  bool done_ = false;
};

/// Pull-based reader over the decoder's audio channel, addressed by absolute
/// sample index from t = 0.
class AudioStream {
 public:
  AudioStream(const std::string& path, const DecoderSpec& spec, const VideoMeta& meta)
      : video_id_(meta.video_id),
        proc_(std::make_unique<Subprocess>(expand_template(spec.audio_cmd, {{"input", path}}),
                                           Subprocess::Options{false, true, true, {}})) {}

  /// Reads up to out.size() samples; fewer only at end of stream.
  std::size_t read(std::span<std::int16_t> out) {
    std::size_t got = 0;
    if (done_ || out.empty()) return 0;
    std::vector<std::uint8_t> bytes(out.size() * 2);
    const std::size_t n = proc_->read_full(bytes);
    if (n < bytes.size()) finish(n % 2 == 1);
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      out[got++] = static_cast<std::int16_t>(static_cast<std::uint16_t>(bytes[i] | (bytes[i + 1] << 8)));
    }
    position_ += got;
    return got;
  }

  /// Discards samples until absolute index `target`. Returns false if the
  /// stream ended first.
  bool skip_to(std::int64_t target) {
    std::vector<std::int16_t> scratch(4096);
    while (position_ < target) {
      const auto want = static_cast<std::size_t>(std::min<std::int64_t>(target - position_, 4096));
      if (read(std::span(scratch).first(want)) < want) return false;
    }
    return true;
  }

  std::int64_t position() const { return position_; }

  /// Reads to the end of the stream so the decoder exit status is checked.
  void drain() {
    std::vector<std::int16_t> scratch(8192);
    while (!done_) read(scratch);
  }

  void abandon() {
    done_ = true;
    proc_->close_stdout();
    proc_->kill();
    proc_->wait();
  }

 private:
  void finish(bool odd_byte) {
    done_ = true;
    const int code = proc_->wait();
    if (code != 0) {
      throw Error(ErrorKind::DecoderCrash,
                  video_id_ + ": audio decoder exited with status " + std::to_string(code));
    }
    if (odd_byte) throw Error(ErrorKind::DecoderCrash, video_id_ + ": odd byte count in PCM stream");
  }

  std::string video_id_;
  std::unique_ptr<Subprocess> proc_;
  std::int64_t position_ = 0;
  bool done_ = false;
};

struct MediaStreams {
  FrameStream video;
  AudioStream audio;
};

inline MediaStreams open_streams(const std::string& path, const DecoderSpec& spec, const VideoMeta& meta) {
  return MediaStreams{FrameStream(path, spec, meta), AudioStream(path, spec, meta)};
}

/// Decodes frames up to `index` and returns that frame (or the last one if
/// the stream is shorter). Used to pick the border-detection frame.
inline FrameBuffer read_frame_at(const std::string& path, const DecoderSpec& spec, const VideoMeta& meta,
                                 std::int64_t index) {
  FrameStream stream(path, spec, meta);
  std::optional<FrameBuffer> last;
  for (std::int64_t i = 0; i <= index; ++i) {
    auto f = stream.next();
    if (!f) break;
    last = std::move(f);
  }
  if (stream.frames_read() > index) stream.abandon();
  if (!last) throw Error(ErrorKind::UnreadableMedia, meta.video_id + ": decoder produced no frames");
  return std::move(*last);
}

}  // namespace avt
