#pragma once

// Run configuration. The config file is flat `key = value` text ('#' starts a
// comment); every key is also a command-line flag of the same name, and
// flags override the file.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "avt/caption.hpp"
#include "avt/image_codec.hpp"
#include "avt/ingest.hpp"
#include "avt/media_core.hpp"
#include "avt/parallel.hpp"

namespace avt {

enum class StatsSource { Auto, Store, Shards };

struct RunConfig {
  std::vector<std::string> inputs;
  std::string out = "avt_out";
  FilterConfig filter;
  DecoderSpec decoder;
  CaptionerSpec captioner;
  std::size_t rows_per_csv = 2500;
  std::size_t csvs_per_zip = 4;
  bool audio_as_path = false;
  ImageFormat image_format = ImageFormat::Jpeg;
  int jpeg_quality = 90;
  std::uint32_t amp_bins = 256;
  int adi_bins = 32;
  std::size_t top_k = 60;
  std::string stoplist;  // file of words, one per line; empty = bundled list
  StatsSource stats_source = StatsSource::Auto;
  int workers = default_workers();
  std::uint64_t seed = 0;

  /// Applies one `key = value` setting. Throws InvalidArgument on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value) {
    auto as_int = [&](auto& field) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        using T = std::remove_reference_t<decltype(field)>;
        if (std::is_unsigned_v<T> && v < 0) throw std::out_of_range(value);
        field = static_cast<T>(v);
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidArgument, key + ": expected an integer, got '" + value + "'");
      }
    };
    auto as_double = [&](double& field) {
      try {
        std::size_t used = 0;
        field = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidArgument, key + ": expected a number, got '" + value + "'");
      }
    };
    auto as_bool = [&](bool& field) {
      if (value == "true" || value == "1" || value == "yes") {
        field = true;
      } else if (value == "false" || value == "0" || value == "no") {
        field = false;
      } else {
        throw Error(ErrorKind::InvalidArgument, key + ": expected true/false, got '" + value + "'");
      }
    };

    if (key == "input") {
      inputs.push_back(value);
    } else if (key == "out") {
      out = value;
    } else if (key == "border-threshold") {
      as_int(filter.border_threshold);
    } else if (key == "cut-threshold") {
      as_double(filter.cut_threshold);
    } else if (key == "silence-amp") {
      as_int(filter.silence_amp);
    } else if (key == "silence-dur") {
      as_double(filter.silence_dur);
    } else if (key == "dark-mean") {
      as_double(filter.dark_mean);
    } else if (key == "keep-every") {
      as_int(filter.keep_every);
    } else if (key == "size") {
      as_int(filter.out_size);
    } else if (key == "min-crop-dim") {
      as_int(filter.min_crop_dim);
    } else if (key == "fade-lookahead") {
      as_int(filter.fade_lookahead);
    } else if (key == "probe-cmd") {
      decoder.probe_cmd = value;
    } else if (key == "video-cmd") {
      decoder.video_cmd = value;
    } else if (key == "audio-cmd") {
      decoder.audio_cmd = value;
    } else if (key == "captioner") {
      if (value == "mock") {
        captioner.kind = CaptionerKind::Mock;
      } else if (value == "external") {
        captioner.kind = CaptionerKind::External;
      } else {
        throw Error(ErrorKind::InvalidArgument, "captioner must be mock or external");
      }
    } else if (key == "captioner-cmd") {
      captioner.command = value;
    } else if (key == "min-tokens") {
      as_int(captioner.min_tokens);
    } else if (key == "max-tokens") {
      as_int(captioner.max_tokens);
    } else if (key == "beams") {
      as_int(captioner.beams);
    } else if (key == "caption-min-words") {
      as_int(captioner.min_words);
    } else if (key == "caption-max-words") {
      as_int(captioner.max_words);
    } else if (key == "caption-timeout-ms") {
      as_int(captioner.timeout_ms);
    } else if (key == "rows-per-csv") {
      as_int(rows_per_csv);
    } else if (key == "csvs-per-zip") {
      as_int(csvs_per_zip);
    } else if (key == "audio-as-path") {
      as_bool(audio_as_path);
    } else if (key == "image-format") {
      if (value == "jpg" || value == "jpeg") {
        image_format = ImageFormat::Jpeg;
      } else if (value == "png") {
        image_format = ImageFormat::Png;
      } else {
        throw Error(ErrorKind::InvalidArgument, "image-format must be jpg or png");
      }
    } else if (key == "jpeg-quality") {
      as_int(jpeg_quality);
    } else if (key == "amp-bins") {
      as_int(amp_bins);
    } else if (key == "adi-bins") {
      as_int(adi_bins);
    } else if (key == "top-k") {
      as_int(top_k);
    } else if (key == "stoplist") {
      stoplist = value;
    } else if (key == "stats-source") {
      if (value == "auto") {
        stats_source = StatsSource::Auto;
      } else if (value == "store") {
        stats_source = StatsSource::Store;
      } else if (value == "shards") {
        stats_source = StatsSource::Shards;
      } else {
        throw Error(ErrorKind::InvalidArgument, "stats-source must be auto, store or shards");
      }
    } else if (key == "workers") {
      as_int(workers);
    } else if (key == "seed") {
      as_int(seed);
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
    }
  }

  void validate() const {
    filter.validate();
    captioner.validate();
    if (rows_per_csv == 0 || csvs_per_zip == 0) throw Error(ErrorKind::InvalidArgument, "shard sizes must be positive");
    if (jpeg_quality < 1 || jpeg_quality > 100) throw Error(ErrorKind::InvalidArgument, "jpeg-quality must be 1..100");
    if (amp_bins == 0 || amp_bins > 65536 || 65536 % amp_bins != 0) {
      throw Error(ErrorKind::InvalidArgument, "amp-bins must divide 65536");
    }
    if (adi_bins < 1) throw Error(ErrorKind::InvalidArgument, "adi-bins must be positive");
    if (workers < 1) throw Error(ErrorKind::InvalidArgument, "workers must be positive");
  }

  /// Every setting in a fixed order, formatted so that set() reproduces it.
  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> e;
    for (const auto& in : inputs) e.emplace_back("input", in);
    e.emplace_back("out", out);
    e.emplace_back("border-threshold", std::to_string(filter.border_threshold));
    e.emplace_back("cut-threshold", format_double(filter.cut_threshold));
    e.emplace_back("silence-amp", std::to_string(filter.silence_amp));
    e.emplace_back("silence-dur", format_double(filter.silence_dur));
    e.emplace_back("dark-mean", format_double(filter.dark_mean));
    e.emplace_back("keep-every", std::to_string(filter.keep_every));
    e.emplace_back("size", std::to_string(filter.out_size));
    e.emplace_back("min-crop-dim", std::to_string(filter.min_crop_dim));
    e.emplace_back("fade-lookahead", std::to_string(filter.fade_lookahead));
    e.emplace_back("probe-cmd", decoder.probe_cmd);
    e.emplace_back("video-cmd", decoder.video_cmd);
    e.emplace_back("audio-cmd", decoder.audio_cmd);
    e.emplace_back("captioner", captioner.kind == CaptionerKind::Mock ? "mock" : "external");
    e.emplace_back("captioner-cmd", captioner.command);
    e.emplace_back("min-tokens", std::to_string(captioner.min_tokens));
    e.emplace_back("max-tokens", std::to_string(captioner.max_tokens));
    e.emplace_back("beams", std::to_string(captioner.beams));
    e.emplace_back("caption-min-words", std::to_string(captioner.min_words));
    e.emplace_back("caption-max-words", std::to_string(captioner.max_words));
    e.emplace_back("caption-timeout-ms", std::to_string(captioner.timeout_ms));
    e.emplace_back("rows-per-csv", std::to_string(rows_per_csv));
    e.emplace_back("csvs-per-zip", std::to_string(csvs_per_zip));
    e.emplace_back("audio-as-path", audio_as_path ? "true" : "false");
    e.emplace_back("image-format", image_format == ImageFormat::Jpeg ? "jpg" : "png");
    e.emplace_back("jpeg-quality", std::to_string(jpeg_quality));
    e.emplace_back("amp-bins", std::to_string(amp_bins));
    e.emplace_back("adi-bins", std::to_string(adi_bins));
    e.emplace_back("top-k", std::to_string(top_k));
    e.emplace_back("stoplist", stoplist);
    e.emplace_back("stats-source", stats_source == StatsSource::Auto    ? "auto"
                                   : stats_source == StatsSource::Store ? "store"
                                                                        : "shards");
    e.emplace_back("workers", std::to_string(workers));
    e.emplace_back("seed", std::to_string(seed));
    return e;
  }

  /// Settings that shape the dataset; the output location and the worker
  /// count are left out so equal data yields equal manifests.
  std::vector<std::pair<std::string, std::string>> content_entries() const {
    auto all = entries();
    std::erase_if(all, [](const auto& kv) { return kv.first == "out" || kv.first == "workers"; });
    return all;
  }

  std::string serialize() const {
    std::string text;
    for (const auto& [k, v] : entries()) text += k + " = " + v + "\n";
    return text;
  }

  /// Shortest text that parses back to exactly `v`.
  static std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
};

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Applies every line of a config file to `cfg`.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) { return a.entries() == b.entries(); }

}  // namespace avt
