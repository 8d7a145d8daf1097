#pragma once

// On-disk layout shared by the pipeline stages.
//
//   <out>/pairs/<id>.jpg|png, <out>/pairs/<id>.wav   pair store
//   <out>/pairs/index.tsv                            id, video, fragment, window, image file
//   <out>/extract_summary.json
//   <out>/captions.tsv, <out>/caption_drops.tsv
//   <out>/shards/*.csv, <out>/shards/*.zip, <out>/manifest.json
//   <out>/reports/

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "avt/error.hpp"

namespace avt {

namespace fs = std::filesystem;

struct StoreLayout {
  fs::path root;

  fs::path pairs_dir() const { return root / "pairs"; }
  fs::path staging_dir() const { return root / ".staging"; }
  fs::path index_path() const { return pairs_dir() / "index.tsv"; }
  fs::path wav_path(std::int64_t id) const { return pairs_dir() / (std::to_string(id) + ".wav"); }
  fs::path image_path(std::int64_t id, std::string_view ext) const {
    return pairs_dir() / (std::to_string(id) + "." + std::string(ext));
  }
  fs::path summary_path() const { return root / "extract_summary.json"; }
  fs::path captions_path() const { return root / "captions.tsv"; }
  fs::path drops_path() const { return root / "caption_drops.tsv"; }
  fs::path shards_dir() const { return root / "shards"; }
  fs::path manifest_path() const { return root / "manifest.json"; }
  fs::path reports_dir() const { return root / "reports"; }
};

struct PairIndexEntry {
  std::int64_t global_id = 0;
  std::string video_id;
  int fragment_index = 0;
  int window_index = 0;
  std::string image_file;

  friend bool operator==(const PairIndexEntry&, const PairIndexEntry&) = default;
};

/// Tabs and line breaks cannot appear inside TSV fields.
inline std::string tsv_safe(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    parts.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return parts;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

inline void write_bytes_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_index(const fs::path& path, const std::vector<PairIndexEntry>& entries) {
  std::ostringstream out;
  out << "id\tvideo_id\tfragment\twindow\timage\n";
  for (const auto& e : entries) {
    out << e.global_id << '\t' << tsv_safe(e.video_id) << '\t' << e.fragment_index << '\t' << e.window_index << '\t'
        << e.image_file << '\n';
  }
  write_text_file(path, out.str());
}

inline std::vector<PairIndexEntry> read_index(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<PairIndexEntry> entries;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 5) throw Error(ErrorKind::IoError, "malformed index line: " + line);
    entries.push_back(PairIndexEntry{std::stoll(f[0]), f[1], std::stoi(f[2]), std::stoi(f[3]), f[4]});
  }
  return entries;
}

}  // namespace avt
