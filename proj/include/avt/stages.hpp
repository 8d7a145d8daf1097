#pragma once

// The `caption`, `pack` and `stats` stages. Each reads what the previous
// stage left under the output root; see store.hpp for the layout.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avt/analytics/adi.hpp"
#include "avt/analytics/amplitude.hpp"
#include "avt/analytics/words.hpp"
#include "avt/caption.hpp"
#include "avt/config.hpp"
#include "avt/packer.hpp"
#include "avt/parallel.hpp"
#include "avt/store.hpp"
#include "avt/wav.hpp"
#include "avt/zip.hpp"

namespace avt {

struct CaptionDrop {
  std::int64_t global_id = 0;
  std::string reason;
};

struct CaptionSummary {
  std::vector<CaptionedRecord> records;
  std::vector<CaptionDrop> drops;
};

inline void write_captions(const fs::path& path, const std::vector<CaptionedRecord>& records) {
  std::string text = "id\ttext\n";
  for (const auto& r : records) text += std::to_string(r.global_id) + "\t" + r.text + "\n";
  write_text_file(path, text);
}

inline std::vector<CaptionedRecord> read_captions(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<CaptionedRecord> records;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorKind::IoError, "malformed caption line: " + line);
    records.push_back(CaptionedRecord{std::stoll(line.substr(0, tab)), line.substr(tab + 1)});
  }
  return records;
}

inline AudioClip load_wav(const fs::path& path) { return decode_wav(read_file_bytes(path.string())); }

/// The `caption` stage. One captioner (and plugin process) per worker; the
/// output order is the id order regardless of which worker finished first.
inline CaptionSummary run_caption(const RunConfig& cfg) {
  cfg.validate();
  const StoreLayout layout{cfg.out};
  if (!fs::exists(layout.index_path())) throw Error(ErrorKind::NoInput, "no pair store under " + cfg.out);
  const std::vector<PairIndexEntry> index = read_index(layout.index_path());

  std::vector<CaptionOutcome> outcomes(index.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(index.size(), 1))));
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t) {
    Captioner captioner(cfg.captioner);
    for (std::size_t i; (i = next++) < index.size();) {
      const std::string image = fs::absolute(layout.pairs_dir() / index[i].image_file).string();
      outcomes[i] = caption_with_retry(captioner, image, index[i].global_id);
    }
  });

  CaptionSummary summary;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (outcomes[i].text) {
      summary.records.push_back(CaptionedRecord{index[i].global_id, *outcomes[i].text});
    } else {
      summary.drops.push_back(CaptionDrop{index[i].global_id, tsv_safe(outcomes[i].drop_reason)});
      std::cerr << "avt: pair " << index[i].global_id << ": caption dropped: " << outcomes[i].drop_reason << "\n";
    }
  }
  write_captions(layout.captions_path(), summary.records);
  std::string drops = "id\treason\n";
  for (const auto& d : summary.drops) drops += std::to_string(d.global_id) + "\t" + d.reason + "\n";
  write_text_file(layout.drops_path(), drops);
  if (!index.empty() && summary.records.empty()) {
    throw Error(ErrorKind::AllDropped, "every caption was dropped");
  }
  return summary;
}

/// The `pack` stage: CSV and zip shards plus manifest.json. Old shards are
/// removed first so reruns leave exactly the new set.
inline ShardManifest run_pack(const RunConfig& cfg) {
  cfg.validate();
  const StoreLayout layout{cfg.out};
  if (!fs::exists(layout.captions_path()) || !fs::exists(layout.index_path())) {
    throw Error(ErrorKind::NoInput, "no captioned pair store under " + cfg.out);
  }
  const std::vector<CaptionedRecord> records = read_captions(layout.captions_path());
  std::map<std::int64_t, std::string> image_of;
  for (const auto& e : read_index(layout.index_path())) image_of[e.global_id] = e.image_file;
  for (const auto& r : records) {
    if (!image_of.contains(r.global_id)) {
      throw Error(ErrorKind::IoError, "caption for unknown pair " + std::to_string(r.global_id));
    }
  }

  fs::remove_all(layout.shards_dir());
  fs::remove(layout.manifest_path());
  PairSource source;
  source.audio = [&](std::int64_t id) { return load_wav(layout.wav_path(id)); };
  source.image_file = [&](std::int64_t id) { return layout.pairs_dir() / image_of.at(id); };
  source.wav_file = [&](std::int64_t id) { return layout.wav_path(id); };
  ShardManifest manifest = write_csv_shards(
      records, source, layout.shards_dir(),
      PackOptions{cfg.rows_per_csv, cfg.csvs_per_zip, cfg.audio_as_path, cfg.workers});

  manifest.config = cfg.content_entries();
  if (fs::exists(layout.summary_path())) {
    const auto summary = nlohmann::json::parse(read_text_file(layout.summary_path()));
    for (const auto& v : summary.at("videos")) {
      if (v.at("status") != "ok") {
        ++manifest.dropped["videos_skipped"];
        continue;
      }
      manifest.dropped["no_frame"] += v.at("no_frame_dropped").get<std::uint64_t>();
      manifest.dropped["silence"] += v.at("silence_dropped").get<std::uint64_t>();
      manifest.dropped["dark"] += v.at("dark_dropped").get<std::uint64_t>();
      manifest.dropped["subsample"] += v.at("subsample_dropped").get<std::uint64_t>();
    }
  }
  std::uint64_t caption_drops = 0;
  if (fs::exists(layout.drops_path())) {
    std::istringstream in(read_text_file(layout.drops_path()));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) caption_drops += !line.empty();
  }
  manifest.dropped["caption"] = caption_drops;
  write_text_file(layout.manifest_path(), manifest.dump());
  return manifest;
}

/// Clips and captions feeding the analyses.
class CorpusReader {
 public:
  explicit CorpusReader(const RunConfig& cfg) : layout_{cfg.out} {
    const bool have_shards = fs::exists(layout_.manifest_path());
    switch (cfg.stats_source) {
      case StatsSource::Shards:
        if (!have_shards) throw Error(ErrorKind::NoInput, "no packed shards under " + cfg.out);
        shards_ = true;
        break;
      case StatsSource::Store:
        shards_ = false;
        break;
      case StatsSource::Auto:
        shards_ = have_shards;
        break;
    }
    if (shards_) {
      manifest_ = ShardManifest::from_json(ordered_json::parse(read_text_file(layout_.manifest_path())));
    } else if (!fs::exists(layout_.index_path())) {
      throw Error(ErrorKind::NoInput, "no pair store under " + cfg.out);
    }
  }

  bool from_shards() const { return shards_; }

  std::vector<std::string> captions() const {
    std::vector<std::string> out;
    if (shards_) {
      for (const auto& s : manifest_.csv_shards) {
        for (auto& row : read_csv_shard(layout_.shards_dir() / s.file)) out.push_back(std::move(row.text));
      }
      return out;
    }
    if (!fs::exists(layout_.captions_path())) throw Error(ErrorKind::NoInput, "no captions under " + layout_.root.string());
    for (auto& r : read_captions(layout_.captions_path())) out.push_back(std::move(r.text));
    return out;
  }

  /// Units of audio work: one per CSV shard, or one per stored pair.
  std::size_t audio_units() const { return shards_ ? manifest_.csv_shards.size() : store_ids().size(); }

  /// Calls fn(clip) for every clip of unit `u`.
  template <typename Fn>
  void for_each_clip(std::size_t u, Fn&& fn) const {
    if (!shards_) {
      fn(load_wav(layout_.wav_path(store_ids()[u])));
      return;
    }
    const auto rows = read_csv_shard(layout_.shards_dir() / manifest_.csv_shards[u].file);
    if (!manifest_.audio_as_path) {
      for (const auto& row : rows) fn(parse_samples(row.audio));
      return;
    }
    const std::vector<zip::Entry> entries = zip::read(read_file_bytes(zip_of(manifest_.csv_shards[u].file).string()));
    std::map<std::string, const zip::Entry*> by_name;
    for (const auto& e : entries) by_name[e.name] = &e;
    for (const auto& row : rows) {
      const auto it = by_name.find(row.audio);
      if (it == by_name.end()) throw Error(ErrorKind::MalformedArchive, "missing " + row.audio + " in shard");
      fn(decode_wav(it->second->data));
    }
  }

 private:
  const std::vector<std::int64_t>& store_ids() const {
    std::call_once(ids_once_, [&] {
      for (const auto& e : read_index(layout_.index_path())) ids_.push_back(e.global_id);
    });
    return ids_;
  }

  fs::path zip_of(const std::string& csv_file) const {
    for (const auto& z : manifest_.zip_shards) {
      if (std::find(z.csv_files.begin(), z.csv_files.end(), csv_file) != z.csv_files.end()) {
        return layout_.shards_dir() / z.file;
      }
    }
    throw Error(ErrorKind::MalformedArchive, csv_file + " is in no zip shard");
  }

  StoreLayout layout_;
  bool shards_ = false;
  ShardManifest manifest_;
  mutable std::once_flag ids_once_;
  mutable std::vector<std::int64_t> ids_;
};

/// Map over `units` with one accumulator per worker, then merge in worker
/// order. All accumulators are exact, so the result does not depend on it.
template <typename Acc, typename Make, typename Fn>
Acc map_merge(std::size_t units, int workers, Make make, Fn fn) {
  const std::size_t parts = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), 1,
                                                    std::max<std::size_t>(units, 1));
  std::vector<Acc> accs;
  accs.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) accs.push_back(make());
  parallel_for(parts, static_cast<int>(parts), [&](std::size_t p) {
    for (std::size_t u = p * units / parts; u < (p + 1) * units / parts; ++u) fn(accs[p], u);
  });
  Acc total = make();
  for (const auto& a : accs) total.merge(a);
  return total;
}

inline std::set<std::string> load_stoplist(const std::string& path) {
  if (path.empty()) return analytics::default_stoplist();
  std::set<std::string> words;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    for (auto& w : analytics::tokenize(line)) words.insert(std::move(w));
  }
  return words;
}

enum class StatsKind { Words, Amplitude, Adi };

inline nlohmann::ordered_json words_report_json(const analytics::WordStatsReport& r) {
  nlohmann::ordered_json j;
  j["captions"] = r.captions;
  j["mean_words"] = r.mean_words;
  j["std_words"] = r.std_words;
  j["min_words"] = r.min_words;
  j["max_words"] = r.max_words;
  j["distinct_words"] = r.distinct_words;
  j["distinct_after_stoplist"] = r.distinct_after_stoplist;
  j["top"] = nlohmann::ordered_json::array();
  for (const auto& w : r.top) j["top"].push_back({{"word", w.word}, {"captions", w.captions}, {"percent", w.percent}});
  return j;
}

inline nlohmann::ordered_json adi_report_json(const analytics::AdiReport& r) {
  nlohmann::ordered_json j;
  j["clips"] = r.clips;
  j["adi"] = r.adi_value;
  j["classification"] = std::string(analytics::to_string(r.classification));
  j["bin_power"] = r.bin_power;
  j["probabilities"] = r.probabilities;
  return j;
}

/// The `stats` stage. Returns the path of the JSON report written.
inline fs::path run_stats(const RunConfig& cfg, StatsKind which) {
  cfg.validate();
  const StoreLayout layout{cfg.out};
  const CorpusReader corpus(cfg);
  fs::create_directories(layout.reports_dir());
  nlohmann::ordered_json j;
  j["source"] = corpus.from_shards() ? "shards" : "store";
  fs::path report;

  switch (which) {
    case StatsKind::Words: {
      const std::vector<std::string> captions = corpus.captions();
      const auto acc = map_merge<analytics::WordStatsAccumulator>(
          captions.size(), cfg.workers, [] { return analytics::WordStatsAccumulator{}; },
          [&](analytics::WordStatsAccumulator& a, std::size_t i) { a.add(captions[i]); });
      j.update(words_report_json(acc.report(load_stoplist(cfg.stoplist), cfg.top_k)));
      report = layout.reports_dir() / "words.json";
      break;
    }
    case StatsKind::Amplitude: {
      const auto m = map_merge<analytics::AmplitudeMatrix>(
          corpus.audio_units(), cfg.workers, [&] { return analytics::AmplitudeMatrix(cfg.amp_bins); },
          [&](analytics::AmplitudeMatrix& a, std::size_t u) {
            corpus.for_each_clip(u, [&](const AudioClip& c) { a.add(c); });
          });
      const fs::path pgm = layout.reports_dir() / "amplitude.pgm";
      write_bytes_file(pgm, analytics::render_matrix(m));
      j["clips"] = m.clips();
      j["amp_bins"] = m.amp_bins();
      j["max_count"] = m.max_count();
      j["image"] = pgm.filename().string();
      report = layout.reports_dir() / "amplitude.json";
      break;
    }
    case StatsKind::Adi: {
      const analytics::MelBinning binning{cfg.adi_bins, 8000.0};
      const auto acc = map_merge<analytics::AdiAccumulator>(
          corpus.audio_units(), cfg.workers, [&] { return analytics::AdiAccumulator(binning); },
          [&](analytics::AdiAccumulator& a, std::size_t u) {
            corpus.for_each_clip(u, [&](const AudioClip& c) { a.add(c); });
          });
      if (acc.clips() == 0) throw Error(ErrorKind::EmptyCorpus, "no audio clips");
      j.update(adi_report_json(analytics::finalize(acc)));
      report = layout.reports_dir() / "adi.json";
      break;
    }
  }
  write_text_file(report, j.dump(2) + "\n");
  return report;
}

}  // namespace avt
