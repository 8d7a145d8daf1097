#pragma once

// Dataset packing: captioned records become CSV tables (id,text,audio), the
// tables are grouped with their images into zip shards, and a manifest lists
// every shard with its id range.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avt/caption.hpp"
#include "avt/csv.hpp"
#include "avt/media_core.hpp"
#include "avt/parallel.hpp"
#include "avt/store.hpp"
#include "avt/zip.hpp"

namespace avt {

using ordered_json = nlohmann::ordered_json;

struct CsvShardInfo {
  std::string file;
  std::int64_t first_id = 0;
  std::int64_t last_id = 0;
  std::size_t rows = 0;

  friend bool operator==(const CsvShardInfo&, const CsvShardInfo&) = default;
};

struct ZipShardInfo {
  std::string file;
  std::vector<std::string> csv_files;
  std::size_t entries = 0;

  friend bool operator==(const ZipShardInfo&, const ZipShardInfo&) = default;
};

/// Manifest schema (JSON, keys in this order):
///   format        "avt-manifest/1"
///   config        run configuration echo, key -> string
///   total_pairs   captioned records packed
///   dropped       reason -> count
///   audio_column  "samples" | "path"
///   csv_shards    [{file, first_id, last_id, rows}]
///   zip_shards    [{file, csv_files, entries}]
struct ShardManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t total_pairs = 0;
  std::map<std::string, std::uint64_t> dropped;
  bool audio_as_path = false;
  std::vector<CsvShardInfo> csv_shards;
  std::vector<ZipShardInfo> zip_shards;

  ordered_json to_json() const {
    ordered_json j;
    j["format"] = "avt-manifest/1";
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    j["total_pairs"] = total_pairs;
    ordered_json drops = ordered_json::object();
    for (const auto& [k, v] : dropped) drops[k] = v;
    j["dropped"] = drops;
    j["audio_column"] = audio_as_path ? "path" : "samples";
    j["csv_shards"] = ordered_json::array();
    for (const auto& s : csv_shards) {
      j["csv_shards"].push_back({{"file", s.file}, {"first_id", s.first_id}, {"last_id", s.last_id}, {"rows", s.rows}});
    }
    j["zip_shards"] = ordered_json::array();
    for (const auto& z : zip_shards) {
      j["zip_shards"].push_back({{"file", z.file}, {"csv_files", z.csv_files}, {"entries", z.entries}});
    }
    return j;
  }

  static ShardManifest from_json(const ordered_json& j) {
    ShardManifest m;
    for (const auto& [k, v] : j.at("config").items()) m.config.emplace_back(k, v.get<std::string>());
    m.total_pairs = j.at("total_pairs").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("dropped").items()) m.dropped[k] = v.get<std::uint64_t>();
    m.audio_as_path = j.at("audio_column").get<std::string>() == "path";
    for (const auto& s : j.at("csv_shards")) {
      m.csv_shards.push_back(CsvShardInfo{s.at("file").get<std::string>(), s.at("first_id").get<std::int64_t>(),
                                          s.at("last_id").get<std::int64_t>(), s.at("rows").get<std::size_t>()});
    }
    for (const auto& z : j.at("zip_shards")) {
      m.zip_shards.push_back(ZipShardInfo{z.at("file").get<std::string>(),
                                          z.at("csv_files").get<std::vector<std::string>>(),
                                          z.at("entries").get<std::size_t>()});
    }
    return m;
  }

  std::string dump() const { return to_json().dump(2) + "\n"; }
};

struct PackOptions {
  std::size_t rows_per_csv = 2500;
  std::size_t csvs_per_zip = 4;
  bool audio_as_path = false;
  int workers = 1;
};

/// Where the packer finds the payload of each record.
struct PairSource {
  std::function<AudioClip(std::int64_t)> audio;
  /// Image file to place in the zip next to the CSV; empty path = none.
  std::function<fs::path(std::int64_t)> image_file;
  /// WAV file referenced by the audio column in path mode.
  std::function<fs::path(std::int64_t)> wav_file;
};

inline std::string format_samples(const AudioClip& clip) {
  std::string out;
  out.reserve(kClipSamples * 6);
  char buf[8];
  bool first = true;
  for (std::int16_t s : clip.samples()) {
    if (!first) out += ' ';
    first = false;
    const int n = std::snprintf(buf, sizeof buf, "%d", static_cast<int>(s));
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

inline AudioClip parse_samples(std::string_view field) {
  std::vector<std::int16_t> samples;
  samples.reserve(kClipSamples);
  std::size_t i = 0;
  while (i < field.size()) {
    while (i < field.size() && field[i] == ' ') ++i;
    if (i >= field.size()) break;
    bool neg = false;
    if (field[i] == '-') {
      neg = true;
      ++i;
    }
    long v = 0;
    std::size_t digits = 0;
    while (i < field.size() && field[i] >= '0' && field[i] <= '9') {
      v = v * 10 + (field[i] - '0');
      ++i;
      if (++digits > 5) break;
    }
    if (neg) v = -v;
    if (digits == 0 || v < -32768 || v > 32767 || (i < field.size() && field[i] != ' ')) {
      throw Error(ErrorKind::MalformedArchive, "bad sample in audio column");
    }
    samples.push_back(static_cast<std::int16_t>(v));
  }
  if (samples.size() != kClipSamples) {
    throw Error(ErrorKind::MalformedArchive, "audio column holds " + std::to_string(samples.size()) + " samples");
  }
  return AudioClip(std::move(samples));
}

inline std::string shard_name(const char* stem, std::size_t index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu.%s", stem, index, ext);
  return buf;
}

/// Writes CSV shards and zip shards into `out_dir`. Records must be sorted by
/// id. On any failure every file written by this call is removed.
inline ShardManifest write_csv_shards(const std::vector<CaptionedRecord>& records, const PairSource& source,
                                      const fs::path& out_dir, const PackOptions& opts) {
  if (opts.rows_per_csv == 0 || opts.csvs_per_zip == 0) {
    throw Error(ErrorKind::InvalidArgument, "shard sizes must be positive");
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].global_id <= records[i - 1].global_id) {
      throw Error(ErrorKind::InvalidArgument, "records must be sorted by strictly ascending id");
    }
  }
  fs::create_directories(out_dir);

  ShardManifest manifest;
  manifest.total_pairs = records.size();
  manifest.audio_as_path = opts.audio_as_path;
  const std::size_t n_csv = (records.size() + opts.rows_per_csv - 1) / opts.rows_per_csv;
  const std::size_t n_zip = (n_csv + opts.csvs_per_zip - 1) / opts.csvs_per_zip;
  manifest.csv_shards.resize(n_csv);
  manifest.zip_shards.resize(n_zip);

  std::vector<fs::path> written;
  std::mutex written_mutex;
  auto track = [&](const fs::path& p) {
    std::lock_guard lock(written_mutex);
    written.push_back(p);
  };

  auto write_csv = [&](std::size_t c) {
    const std::size_t begin = c * opts.rows_per_csv;
    const std::size_t end = std::min(records.size(), begin + opts.rows_per_csv);
    const std::string name = shard_name("data", c, "csv");
    const fs::path path = out_dir / name;
    track(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
    csv::write_record(out, {"id", "text", "audio"});
    for (std::size_t r = begin; r < end; ++r) {
      const CaptionedRecord& rec = records[r];
      const std::string id = std::to_string(rec.global_id);
      const std::string audio = opts.audio_as_path ? ("audio/" + std::to_string(rec.global_id) + ".wav")
                                                   : format_samples(source.audio(rec.global_id));
      csv::write_record(out, {id, rec.text, audio});
    }
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
    manifest.csv_shards[c] = CsvShardInfo{name, records[begin].global_id, records[end - 1].global_id, end - begin};
    return std::pair{begin, end};
  };

  auto write_group = [&](std::size_t z) {
    const std::size_t c_begin = z * opts.csvs_per_zip;
    const std::size_t c_end = std::min(n_csv, c_begin + opts.csvs_per_zip);
    const std::string zip_name = shard_name("shard", z, "zip");
    const fs::path zip_path = out_dir / zip_name;
    ZipShardInfo info{zip_name, {}, 0};
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t c = c_begin; c < c_end; ++c) {
      ranges.push_back(write_csv(c));
      info.csv_files.push_back(manifest.csv_shards[c].file);
    }
    track(zip_path);
    zip::Writer zw(zip_path.string());
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      zw.add_file(info.csv_files[k], (out_dir / info.csv_files[k]).string());
      ++info.entries;
      for (std::size_t r = ranges[k].first; r < ranges[k].second; ++r) {
        const std::int64_t id = records[r].global_id;
        if (source.image_file) {
          const fs::path img = source.image_file(id);
          if (!img.empty()) {
            zw.add_file("images/" + img.filename().string(), img.string());
            ++info.entries;
          }
        }
        if (opts.audio_as_path && source.wav_file) {
          zw.add_file("audio/" + std::to_string(id) + ".wav", source.wav_file(id).string());
          ++info.entries;
        }
      }
    }
    zw.finish();
    manifest.zip_shards[z] = std::move(info);
  };

  try {
    parallel_for(n_zip, opts.workers, write_group);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
  return manifest;
}

struct CsvRow {
  std::int64_t id = 0;
  std::string text;
  std::string audio;
};

/// Parses one CSV shard written by write_csv_shards.
inline std::vector<CsvRow> read_csv_shard(std::istream& in) {
  std::vector<CsvRow> rows;
  auto header = csv::read_record(in);
  if (!header || *header != std::vector<std::string>{"id", "text", "audio"}) {
    throw Error(ErrorKind::MalformedArchive, "CSV shard lacks the id,text,audio header");
  }
  while (auto rec = csv::read_record(in)) {
    if (rec->size() != 3) throw Error(ErrorKind::MalformedArchive, "CSV row does not have 3 fields");
    rows.push_back(CsvRow{std::stoll((*rec)[0]), std::move((*rec)[1]), std::move((*rec)[2])});
  }
  return rows;
}

inline std::vector<CsvRow> read_csv_shard(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  return read_csv_shard(in);
}

}  // namespace avt
