#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "avt/config.hpp"
#include "avt/ingest.hpp"
#include "avt/media_core.hpp"
#include "avt/subprocess.hpp"

namespace avt::test {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("avt_test_" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Decoder templates pointing at the synthetic fixture decoder.
inline DecoderSpec rawdec_spec() {
  const std::string bin = shell_quote(AVT_RAWDEC);
  return DecoderSpec{bin + " probe {input}", bin + " video {input}", bin + " audio {input}"};
}

inline RunConfig base_config(const fs::path& out) {
  RunConfig cfg;
  cfg.out = out.string();
  cfg.decoder = rawdec_spec();
  cfg.workers = 2;
  return cfg;
}

/// Script for a single-scene video with a tone soundtrack.
inline std::string single_scene(double seconds, int fps = 30, int width = 640, int height = 480,
                                int level = 128, int noise = 0) {
  const long frames = std::lround(seconds * fps);
  const long samples = std::lround(seconds * kSampleRate);
  return "video width=" + std::to_string(width) + " height=" + std::to_string(height) + " fps=" +
         std::to_string(fps) + "/1\n" + "scene frames=" + std::to_string(frames) + " fill=" + std::to_string(level) +
         "," + std::to_string(level) + "," + std::to_string(level) + " noise=" + std::to_string(noise) + "\n" +
         "tone samples=" + std::to_string(samples) + " freq=440 amp=8000\n";
}

inline std::vector<std::uint8_t> random_pixels(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
  return px;
}

inline AudioClip random_clip(std::mt19937& rng, int amp = 32767) {
  std::uniform_int_distribution<int> d(-std::min(amp, 32768), std::min(amp, 32767));
  std::vector<std::int16_t> s(kClipSamples);
  for (auto& v : s) v = static_cast<std::int16_t>(d(rng));
  return AudioClip(std::move(s));
}

/// Runs the avt CLI with the given argument string; returns (exit, stdout).
inline std::pair<int, std::string> run_cli(const std::string& args) {
  return run_capture(shell_quote(AVT_CLI) + " " + args, true);
}

}  // namespace avt::test
