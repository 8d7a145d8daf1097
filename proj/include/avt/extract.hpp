#pragma once

// Streaming pair extraction for one video and the `extract` stage over a
// corpus. Frames are decoded once for the border frame and once for the main
// pass; at most a few frames are held at any time.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avt/border_crop.hpp"
#include "avt/config.hpp"
#include "avt/image_codec.hpp"
#include "avt/ingest.hpp"
#include "avt/pair_extract.hpp"
#include "avt/parallel.hpp"
#include "avt/segmenter.hpp"
#include "avt/store.hpp"
#include "avt/wav.hpp"

namespace avt {

struct FragmentCounts {
  int fragment_index = 0;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  std::uint64_t windows = 0;
  std::uint64_t no_frame_dropped = 0;
  std::uint64_t silence_dropped = 0;
  std::uint64_t dark_dropped = 0;
  std::uint64_t subsample_dropped = 0;
  std::uint64_t emitted = 0;

  friend bool operator==(const FragmentCounts&, const FragmentCounts&) = default;
};

/// Pair written to the staging area, still without a global id.
struct StagedPair {
  int fragment_index = 0;
  int window_index = 0;
  fs::path image;
  fs::path wav;
};

struct VideoResult {
  std::string video_id;
  std::string source;
  bool ok = false;
  std::string error_kind;
  std::string error;
  Rational fps{1};
  std::int64_t frames = 0;
  std::optional<CropBox> crop;
  std::vector<FragmentCounts> fragments;
  std::vector<StagedPair> pairs;
};

struct ExtractOptions {
  FilterConfig filter;
  ImageFormat image_format = ImageFormat::Jpeg;
  int jpeg_quality = 90;
};

namespace detail {

/// Position of frame k in samples, as the exact fraction k*16000*den/num.
inline __int128 frame_pos_num(std::int64_t k, Rational fps) {
  return static_cast<__int128>(k) * fps.den * kSampleRate;
}

/// First sample at or after the presentation time of frame k.
inline std::int64_t frame_start_sample(std::int64_t k, Rational fps) {
  const __int128 num = frame_pos_num(k, fps);
  return static_cast<std::int64_t>((num + fps.num - 1) / fps.num);
}

/// Turns the stream of decided frames into windows, filters and pairs.
class WindowTracker {
 public:
  using EmitFn = std::function<void(int fragment, int window, const FrameBuffer&, const AudioClip&)>;

  WindowTracker(Rational fps, const FilterConfig& filter, AudioStream& audio, EmitFn emit)
      : fps_(fps), filter_(filter), audio_(audio), emit_(std::move(emit)) {}

  void frame(std::int64_t k, bool starts_fragment, const FrameBuffer& f) {
    if (starts_fragment) {
      if (open_) close_fragment(k);
      open_fragment(k);
    }
    while (lower_candidate(next_window_start()) <= k) create_window();
    for (Pending& w : pending_) {
      if (k == w.lower) w.cand[0] = f;
      if (k == w.lower + 1) w.cand[1] = f;
    }
    // Frame k lies past the end of the front window: every frame of that
    // window has been seen and the window fits inside the fragment.
    while (!pending_.empty() &&
           detail::frame_pos_num(k, fps_) >= static_cast<__int128>(pending_.front().start + static_cast<std::int64_t>(kClipSamples)) * fps_.num) {
      finalize_front(k);
    }
  }

  void finish(std::int64_t total_frames) {
    if (open_) close_fragment(total_frames);
  }

  std::vector<FragmentCounts> take_counts() { return std::move(counts_); }

 private:
  struct Pending {
    int index = 0;
    std::int64_t start = 0;
    std::int64_t lower = 0;
    std::optional<FrameBuffer> cand[2];
  };

  std::int64_t next_window_start() const {
    return fragment_start_sample_ + static_cast<std::int64_t>(next_window_) * static_cast<std::int64_t>(kClipSamples);
  }

  std::int64_t lower_candidate(std::int64_t window_start) const {
    const __int128 centre = static_cast<__int128>(window_start + static_cast<std::int64_t>(kClipSamples / 2)) * fps_.num;
    const __int128 step = static_cast<__int128>(fps_.den) * kSampleRate;
    return std::max(fragment_start_frame_, static_cast<std::int64_t>(centre / step));
  }

  void create_window() {
    Pending w;
    w.index = next_window_++;
    w.start = next_window_start() - static_cast<std::int64_t>(kClipSamples);
    w.lower = lower_candidate(w.start);
    pending_.push_back(std::move(w));
  }

  void open_fragment(std::int64_t k) {
    open_ = true;
    fragment_start_frame_ = k;
    fragment_start_sample_ = frame_start_sample(k, fps_);
    next_window_ = 0;
    survivors_ = 0;
    pending_.clear();
    FragmentCounts c;
    c.fragment_index = static_cast<int>(counts_.size());
    c.start_frame = k;
    counts_.push_back(c);
  }

  void close_fragment(std::int64_t end_frame) {
    counts_.back().end_frame = end_frame;
    const std::int64_t end_sample = frame_start_sample(end_frame, fps_);
    while (next_window_start() + static_cast<std::int64_t>(kClipSamples) <= end_sample) create_window();
    while (!pending_.empty()) {
      if (pending_.front().start + static_cast<std::int64_t>(kClipSamples) > end_sample) break;
      finalize_front(end_frame);
    }
    pending_.clear();
    open_ = false;
  }

  void finalize_front(std::int64_t frames_end) {
    Pending w = std::move(pending_.front());
    pending_.pop_front();
    if (audio_exhausted_) return;
    std::vector<std::int16_t> samples(kClipSamples);
    if (audio_.position() > w.start || !audio_.skip_to(w.start) || audio_.read(samples) < kClipSamples) {
      // The video outlasts its audio; later windows are not windows at all.
      audio_exhausted_ = true;
      return;
    }
    FragmentCounts& c = counts_.back();
    ++c.windows;
    const auto k = middle_frame_index(w.start, fps_, fragment_start_frame_, frames_end);
    const std::optional<FrameBuffer>* chosen = nullptr;
    if (k && *k == w.lower) chosen = &w.cand[0];
    if (k && *k == w.lower + 1) chosen = &w.cand[1];
    if (!chosen || !chosen->has_value()) {
      ++c.no_frame_dropped;
      return;
    }
    const AudioClip clip(std::move(samples), Rational(w.start, kSampleRate));
    if (is_silent(clip, filter_.silence_amp, filter_.silence_dur)) {
      ++c.silence_dropped;
      return;
    }
    const FrameBuffer& image = **chosen;
    if (is_dark(image, filter_.dark_mean)) {
      ++c.dark_dropped;
      return;
    }
    if (survivors_++ % static_cast<std::uint64_t>(filter_.keep_every) != 0) {
      ++c.subsample_dropped;
      return;
    }
    ++c.emitted;
    emit_(c.fragment_index, w.index, image, clip);
  }

  Rational fps_;
  FilterConfig filter_;
  AudioStream& audio_;
  EmitFn emit_;
  bool open_ = false;
  bool audio_exhausted_ = false;
  std::int64_t fragment_start_frame_ = 0;
  std::int64_t fragment_start_sample_ = 0;
  int next_window_ = 0;
  std::uint64_t survivors_ = 0;
  std::deque<Pending> pending_;
  std::vector<FragmentCounts> counts_;
};

}  // namespace detail

/// Extracts the pairs of one video into `staging`. Errors are reported in the
/// result, and a failed video leaves nothing behind.
inline VideoResult extract_video(const std::string& path, const std::string& video_id, const DecoderSpec& decoder,
                                 const ExtractOptions& opts, const fs::path& staging) {
  VideoResult result;
  result.video_id = video_id;
  result.source = path;
  try {
    const VideoMeta meta = probe(path, decoder, video_id);
    result.fps = meta.fps;
    const std::int64_t middle = std::max<std::int64_t>(0, meta.expected_frames() / 2);
    const FrameBuffer border_frame = read_frame_at(path, decoder, meta, middle);
    const CropBox box = compute_crop_box(border_frame, opts.filter.border_threshold, opts.filter.min_crop_dim);
    result.crop = box;

    fs::create_directories(staging);
    const std::string ext(extension(opts.image_format));
    MediaStreams streams = open_streams(path, decoder, meta);
    detail::WindowTracker tracker(
        meta.fps, opts.filter, streams.audio,
        [&](int fragment, int window, const FrameBuffer& image, const AudioClip& clip) {
          const std::string stem = std::to_string(fragment) + "_" + std::to_string(window);
          StagedPair p{fragment, window, staging / (stem + "." + ext), staging / (stem + ".wav")};
          const FrameBuffer square = center_crop_resize(image, opts.filter.out_size);
          write_bytes_file(p.image, encode_image(square, opts.image_format, opts.jpeg_quality));
          write_bytes_file(p.wav, encode_wav(clip));
          result.pairs.push_back(std::move(p));
        });
    CutDetector detector(opts.filter.cut_threshold, opts.filter.fade_lookahead);
    auto drain = [&] {
      while (auto d = detector.pop()) tracker.frame(d->index, d->starts_fragment, d->frame);
    };
    while (auto f = streams.video.next()) {
      detector.push(apply_crop(*f, box));
      drain();
    }
    detector.finish();
    drain();
    result.frames = streams.video.frames_read();
    tracker.finish(result.frames);
    streams.audio.drain();
    result.fragments = tracker.take_counts();
    result.ok = true;
  } catch (const Error& e) {
    result.ok = false;
    result.error_kind = std::string(to_string(e.kind()));
    result.error = e.what();
    result.fragments.clear();
    result.pairs.clear();
    std::error_code ec;
    fs::remove_all(staging, ec);
  }
  return result;
}

/// Regular files named by `inputs`, directories expanded one level, sorted.
inline std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        const std::string name = entry.path().filename().string();
        if (!name.empty() && name[0] == '.') continue;
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
    } else if (fs::exists(p, ec)) {
      files.push_back(p);
    } else {
      std::cerr << "avt: input not found: " << in << "\n";
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

/// File stems, with ~1, ~2, ... appended to repeats in input order.
inline std::vector<std::string> assign_video_ids(const std::vector<fs::path>& files) {
  std::vector<std::string> ids;
  std::set<std::string> taken;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    std::string id = stem;
    for (int n = 1; taken.contains(id); ++n) id = stem + "~" + std::to_string(n);
    taken.insert(id);
    ids.push_back(id);
  }
  return ids;
}

struct ExtractSummary {
  std::vector<VideoResult> videos;
  std::uint64_t total_pairs = 0;

  std::size_t videos_ok() const {
    return static_cast<std::size_t>(std::count_if(videos.begin(), videos.end(), [](const auto& v) { return v.ok; }));
  }

  /// Drop counts over the whole run, keyed by reason.
  std::map<std::string, std::uint64_t> dropped() const {
    std::map<std::string, std::uint64_t> d{{"no_frame", 0}, {"silence", 0}, {"dark", 0}, {"subsample", 0}};
    std::uint64_t skipped = 0;
    for (const auto& v : videos) {
      if (!v.ok) ++skipped;
      for (const auto& f : v.fragments) {
        d["no_frame"] += f.no_frame_dropped;
        d["silence"] += f.silence_dropped;
        d["dark"] += f.dark_dropped;
        d["subsample"] += f.subsample_dropped;
      }
    }
    d["videos_skipped"] = skipped;
    return d;
  }

  nlohmann::ordered_json to_json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "avt-extract/1";
    j["videos"] = ordered_json::array();
    for (const auto& v : videos) {
      ordered_json jv;
      jv["video_id"] = v.video_id;
      jv["source"] = v.source;
      jv["status"] = v.ok ? "ok" : "skipped";
      if (!v.ok) {
        jv["error_kind"] = v.error_kind;
        jv["error"] = v.error;
        j["videos"].push_back(jv);
        continue;
      }
      jv["fps"] = v.fps.to_string();
      jv["frames"] = v.frames;
      if (v.crop) jv["crop"] = {{"x0", v.crop->x0}, {"y0", v.crop->y0}, {"w", v.crop->w}, {"h", v.crop->h}};
      FragmentCounts total;
      jv["fragments"] = ordered_json::array();
      for (const auto& f : v.fragments) {
        jv["fragments"].push_back({{"fragment", f.fragment_index},
                                   {"start_frame", f.start_frame},
                                   {"end_frame", f.end_frame},
                                   {"windows", f.windows},
                                   {"no_frame_dropped", f.no_frame_dropped},
                                   {"silence_dropped", f.silence_dropped},
                                   {"dark_dropped", f.dark_dropped},
                                   {"subsample_dropped", f.subsample_dropped},
                                   {"emitted", f.emitted}});
        total.windows += f.windows;
        total.no_frame_dropped += f.no_frame_dropped;
        total.silence_dropped += f.silence_dropped;
        total.dark_dropped += f.dark_dropped;
        total.subsample_dropped += f.subsample_dropped;
        total.emitted += f.emitted;
      }
      jv["windows"] = total.windows;
      jv["no_frame_dropped"] = total.no_frame_dropped;
      jv["silence_dropped"] = total.silence_dropped;
      jv["dark_dropped"] = total.dark_dropped;
      jv["subsample_dropped"] = total.subsample_dropped;
      jv["emitted"] = total.emitted;
      j["videos"].push_back(jv);
    }
    j["videos_ok"] = videos_ok();
    j["videos_skipped"] = videos.size() - videos_ok();
    j["total_pairs"] = total_pairs;
    return j;
  }
};

/// The `extract` stage: every input video in parallel, then one ordered pass
/// that numbers the pairs and moves them into the pair store.
inline ExtractSummary run_extract(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<fs::path> files = collect_inputs(cfg.inputs);
  if (files.empty()) throw Error(ErrorKind::NoInput, "no input videos");
  const std::vector<std::string> ids = assign_video_ids(files);

  const StoreLayout layout{cfg.out};
  fs::remove_all(layout.pairs_dir());
  fs::remove_all(layout.staging_dir());
  fs::create_directories(layout.pairs_dir());

  ExtractOptions opts{cfg.filter, cfg.image_format, cfg.jpeg_quality};
  ExtractSummary summary;
  summary.videos.resize(files.size());
  parallel_for(files.size(), cfg.workers, [&](std::size_t i) {
    summary.videos[i] = extract_video(files[i].string(), ids[i], cfg.decoder, opts,
                                      layout.staging_dir() / std::to_string(i));
    const VideoResult& v = summary.videos[i];
    if (!v.ok) std::cerr << "avt: " << v.video_id << ": skipped: " << v.error << "\n";
  });

  std::sort(summary.videos.begin(), summary.videos.end(),
            [](const VideoResult& a, const VideoResult& b) { return a.video_id < b.video_id; });
  std::vector<PairIndexEntry> index;
  std::int64_t next_id = 0;
  const std::string ext(extension(cfg.image_format));
  for (VideoResult& v : summary.videos) {
    std::sort(v.pairs.begin(), v.pairs.end(), [](const StagedPair& a, const StagedPair& b) {
      return std::tie(a.fragment_index, a.window_index) < std::tie(b.fragment_index, b.window_index);
    });
    for (const StagedPair& p : v.pairs) {
      const std::int64_t id = next_id++;
      fs::rename(p.image, layout.image_path(id, ext));
      fs::rename(p.wav, layout.wav_path(id));
      index.push_back(PairIndexEntry{id, v.video_id, p.fragment_index, p.window_index,
                                     layout.image_path(id, ext).filename().string()});
    }
  }
  fs::remove_all(layout.staging_dir());
  summary.total_pairs = index.size();
  write_index(layout.index_path(), index);
  write_text_file(layout.summary_path(), summary.to_json().dump(2) + "\n");
  if (summary.videos_ok() == 0) throw Error(ErrorKind::NoInput, "no input video could be processed");
  return summary;
}

}  // namespace avt
