// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avt/avt.hpp"
#include "oracles/oracles.hpp"
#include "support/signals.hpp"
#include "support/test_support.hpp"

using namespace avt;
using namespace avt::test;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

FrameBuffer uniform_frame(int w, int h, int level) {
  return FrameBuffer(w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3, static_cast<std::uint8_t>(level)));
}

std::size_t fragments_of(std::vector<FrameBuffer> frames) {
  return split_segments(frames, 90.0).size();
}

Outcome counting_law() {
  TempDir dir;
  write_file(dir / "in" / "scene.avt", single_scene(10.7, 30, 640, 480, 128, 8));
  RunConfig cfg = base_config(dir / "out");
  cfg.inputs = {(dir / "in" / "scene.avt").string()};
  const auto t0 = Clock::now();
  const auto summary = run_extract(cfg);
  const double secs = seconds_since(t0);
  const auto& v = summary.videos.at(0);
  const std::uint64_t windows = v.fragments.size() == 1 ? v.fragments[0].windows : 0;
  std::ostringstream d;
  d << "windows=" << windows << " pairs=" << summary.total_pairs << " time=" << secs << "s";
  return {v.ok && windows == 10 && summary.total_pairs == 4 && secs < 30.0, d.str()};
}

Outcome cut_detection() {
  TempDir dir;
  const fs::path video = dir / "bw.avt";
  write_file(video,
             "video width=160 height=120 fps=30/1\nscene frames=90 fill=0,0,0\nscene frames=120 fill=255,255,255\n"
             "tone samples=112000 freq=440 amp=8000\n");
  const auto v = extract_video(video.string(), "bw", rawdec_spec(), ExtractOptions{}, dir / "staging");
  const std::size_t bw = v.ok ? v.fragments.size() : 0;
  const std::size_t level9 = fragments_of({uniform_frame(32, 32, 100), uniform_frame(32, 32, 109)});
  const std::size_t level10 = fragments_of({uniform_frame(32, 32, 100), uniform_frame(32, 32, 110)});
  const double msd9 = frame_msd(uniform_frame(8, 8, 0), uniform_frame(8, 8, 9));
  const double msd10 = frame_msd(uniform_frame(8, 8, 0), uniform_frame(8, 8, 10));
  std::ostringstream d;
  d << "black/white fragments=" << bw << " jump9 fragments=" << level9 << " (msd " << msd9
    << ") jump10 fragments=" << level10 << " (msd " << msd10 << ")";
  return {bw == 2 && level9 == 1 && level10 == 2 && msd9 == 81.0 && msd10 == 100.0, d.str()};
}

Outcome border_crop_oracle() {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> dim(3, 14), border(0, 3), dark(0, 15), bright(16, 255);
  int agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const int top = border(rng), bottom = border(rng), left = border(rng), right = border(rng);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(dark(rng));
    // Interior: random content with at least one bright pixel per edge line.
    const int x0 = std::min(left, w - 1), y0 = std::min(top, h - 1);
    const int x1 = std::max(x0, w - 1 - right), y1 = std::max(y0, h - 1 - bottom);
    std::uniform_int_distribution<int> coin(0, 2), ch(0, 2);
    auto set_bright = [&](int x, int y) {
      px[(static_cast<std::size_t>(y) * w + x) * 3 + ch(rng)] = static_cast<std::uint8_t>(bright(rng));
    };
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (coin(rng) == 0) set_bright(x, y);
    set_bright(x0, std::uniform_int_distribution<int>(y0, y1)(rng));
    set_bright(x1, std::uniform_int_distribution<int>(y0, y1)(rng));
    set_bright(std::uniform_int_distribution<int>(x0, x1)(rng), y0);
    set_bright(std::uniform_int_distribution<int>(x0, x1)(rng), y1);
    const FrameBuffer f(w, h, px);
    const auto expected = oracle::crop_boxes_bruteforce(f, 15);
    const CropBox got = compute_crop_box(f, 15, 1);
    if (expected.size() == 1 && expected[0] == got && got == CropBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1}) ++agree;
  }
  return {agree == 200, std::to_string(agree) + "/200 frames agree with the brute-force oracle"};
}

Outcome silence_boundary() {
  auto clip_with_run = [](std::size_t run) {
    std::vector<std::int16_t> s(kClipSamples);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int16_t>(i % 2 ? 5000 : -5000);
    for (std::size_t i = 4000; i < 4000 + run; ++i) s[i] = static_cast<std::int16_t>(i % 3 == 0 ? 100 : -100);
    return AudioClip(std::move(s));
  };
  const bool discarded = is_silent(clip_with_run(8000), 100, 0.5);
  const bool kept = !is_silent(clip_with_run(7999), 100, 0.5);
  return {discarded && kept, std::string("8000-sample run ") + (discarded ? "discarded" : "kept") +
                                 ", 7999-sample run " + (kept ? "kept" : "discarded")};
}

Outcome adi_fixtures() {
  const auto t0 = Clock::now();
  const std::vector<AudioClip> tone(4, sinusoids({1000.0}, 12000.0));
  const double tone_adi = analytics::adi(tone).adi_value;
  const double spread_adi = analytics::adi(equal_mel_dataset(4, 7)).adi_value;
  const bool classes = analytics::classify_adi(3.0525) == analytics::AdiClass::High &&
                       analytics::classify_adi(1.1552) == analytics::AdiClass::Low &&
                       analytics::classify_adi(2.0) == analytics::AdiClass::Medium;
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d.precision(7);
  d << "1kHz adi=" << tone_adi << " equal-mel adi=" << spread_adi << " (ln32=" << std::log(32.0)
    << ") tertiles " << (classes ? "ok" : "wrong") << " time=" << secs << "s";
  return {tone_adi < 0.05 && std::abs(spread_adi - std::log(32.0)) <= 0.01 && classes && secs < 10.0, d.str()};
}

Outcome parseval() {
  std::mt19937 rng(99);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const AudioClip clip = random_clip(rng, 1 + static_cast<int>(rng() % 32767));
    const auto x = analytics::windowed(clip);
    long double time_energy = 0;
    for (double v : x) time_energy += static_cast<long double>(v) * v;
    const auto p = analytics::power_spectrum(clip);
    long double freq_energy = p.front() + p.back();
    for (std::size_t f = 1; f + 1 < p.size(); ++f) freq_energy += 2.0L * p[f];
    freq_energy /= static_cast<long double>(kClipSamples);
    worst = std::max(worst, static_cast<double>(std::abs(freq_energy - time_energy) / time_energy));
  }
  std::ostringstream d;
  d << "worst relative error " << worst << " over 100 clips";
  return {worst < 1e-6, d.str()};
}

Outcome amplitude_matrix() {
  std::mt19937 rng(5);
  bool sums_ok = true;
  for (int n : {1, 3, 17}) {
    analytics::AmplitudeMatrix m;
    for (int i = 0; i < n; ++i) m.add(random_clip(rng, 1 + static_cast<int>(rng() % 32767)));
    for (std::size_t t = 0; t < kClipSamples; ++t) sums_ok &= m.column_sum(t) == static_cast<std::uint64_t>(n);
  }
  analytics::AmplitudeMatrix zero;
  zero.add(AudioClip{});
  const auto pgm = analytics::render_matrix(zero);
  const std::string header = "P5\n16000 256\n255\n";
  bool image_ok = pgm.size() == header.size() + 256 * kClipSamples &&
                  std::equal(header.begin(), header.end(), pgm.begin());
  const std::size_t centre_row = 127;
  for (std::size_t r = 0; image_ok && r < 256; ++r) {
    for (std::size_t t = 0; t < kClipSamples; ++t) {
      if (pgm[header.size() + r * kClipSamples + t] != (r == centre_row ? 0 : 255)) image_ok = false;
    }
  }
  return {sums_ok && image_ok, std::string("column sums ") + (sums_ok ? "exact" : "wrong") + ", zero-clip image " +
                                   (image_ok ? "white except row 127" : "wrong")};
}

Outcome packer_round_trip() {
  TempDir dir;
  std::mt19937 rng(50);
  const std::vector<std::string> vocab{"a", "dog", "running", "on", "the", "beach,", "\"big\"", "waves", "sky"};
  std::vector<CaptionedRecord> records;
  std::map<std::int64_t, AudioClip> clips;
  fs::create_directories(dir / "src");
  bool wav_ok = true;
  for (std::int64_t id = 0; id < 50; ++id) {
    std::string text;
    const int words = 1 + static_cast<int>(rng() % 20);
    for (int w = 0; w < words; ++w) text += (w ? " " : "") + vocab[rng() % vocab.size()];
    records.push_back({id * 2 + 1, text});
    const AudioClip clip = random_clip(rng);
    clips.emplace(id * 2 + 1, clip);
    const auto wav = encode_wav(clip);
    wav_ok &= wav.size() == 32044 && decode_wav(wav) == clip;
    write_file(dir / "src" / (std::to_string(id * 2 + 1) + ".jpg"), "image");
  }
  PairSource source;
  source.audio = [&](std::int64_t id) { return clips.at(id); };
  source.image_file = [&](std::int64_t id) { return dir / "src" / (std::to_string(id) + ".jpg"); };
  const auto manifest = write_csv_shards(records, source, dir / "shards", PackOptions{8, 3, false, 2});
  std::vector<CsvRow> rows;
  for (const auto& z : manifest.zip_shards) {
    for (const auto& e : zip::read(read_file_bytes((dir / "shards" / z.file).string()))) {
      if (!e.name.ends_with(".csv")) continue;
      std::istringstream in(std::string(e.data.begin(), e.data.end()));
      for (auto& r : read_csv_shard(in)) rows.push_back(std::move(r));
    }
  }
  bool rows_ok = rows.size() == records.size();
  for (std::size_t i = 0; rows_ok && i < rows.size(); ++i) {
    rows_ok = rows[i].id == records[i].global_id && rows[i].text == records[i].text &&
              parse_samples(rows[i].audio) == clips.at(rows[i].id);
  }
  return {rows_ok && wav_ok, std::to_string(rows.size()) + " records read back " + (rows_ok ? "identical" : "DIFFERENT") +
                                 ", wav " + (wav_ok ? "32044 bytes and lossless" : "wrong")};
}

/// Relative path -> bytes for every file under root.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

void full_run(const RunConfig& cfg) {
  run_extract(cfg);
  run_caption(cfg);
  run_pack(cfg);
  run_stats(cfg, StatsKind::Words);
  run_stats(cfg, StatsKind::Amplitude);
  run_stats(cfg, StatsKind::Adi);
}

void write_fixture_corpus(const fs::path& dir) {
  write_file(dir / "tone.avt", single_scene(7.3, 30, 192, 144, 150, 10));
  write_file(dir / "cuts.avt",
             "video width=160 height=120 fps=25/1\nscene frames=100 fill=200,40,40 noise=6 seed=2\n"
             "scene frames=100 fill=30,30,220 noise=6 seed=3\nnoise samples=128000 amp=6000 seed=4\n");
  write_file(dir / "quiet.avt",
             "video width=128 height=128 fps=30000/1001\nscene frames=270 fill=90,120,60 border=8\n"
             "tone samples=48000 freq=220 amp=9000\nsilence samples=32000\ntone samples=64000 freq=880 amp=4000\n");
  write_file(dir / "broken.avt", "not a video\n");
}

Outcome determinism() {
  TempDir dir;
  write_fixture_corpus(dir / "corpus");
  RunConfig a = base_config(dir / "run1");
  a.inputs = {(dir / "corpus").string()};
  a.rows_per_csv = 3;
  a.csvs_per_zip = 2;
  RunConfig b = a;
  b.out = (dir / "run2").string();
  b.workers = 4;
  full_run(a);
  full_run(b);
  const auto s1 = snapshot(dir / "run1");
  const auto s2 = snapshot(dir / "run2");
  std::size_t differing = 0;
  for (const auto& [name, bytes] : s1) {
    const auto it = s2.find(name);
    if (it == s2.end() || it->second != bytes) ++differing;
  }
  const bool same = s1.size() == s2.size() && differing == 0;
  return {same && s1.size() > 10, std::to_string(s1.size()) + " files per run, " + std::to_string(differing) +
                                      " differ"};
}

Outcome merge_equivalence() {
  std::mt19937 rng(77);
  std::vector<AudioClip> clips;
  for (int i = 0; i < 10; ++i) clips.push_back(random_clip(rng, 500 + 3000 * i));
  std::vector<std::string> captions;
  const std::vector<std::string> vocab{"man", "the", "guitar", "a", "playing", "stage", "crowd", "on"};
  for (int i = 0; i < 40; ++i) {
    std::string c;
    for (int w = 0; w < 3 + i % 9; ++w) c += (w ? " " : "") + vocab[rng() % vocab.size()];
    captions.push_back(c);
  }
  analytics::AdiAccumulator adi_all, adi_a, adi_b;
  analytics::AmplitudeMatrix amp_all, amp_a, amp_b;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    adi_all.add(clips[i]);
    amp_all.add(clips[i]);
    (i < 5 ? adi_a : adi_b).add(clips[i]);
    (i < 5 ? amp_a : amp_b).add(clips[i]);
  }
  analytics::WordStatsAccumulator words_all, words_a, words_b;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    words_all.add(captions[i]);
    (i < 20 ? words_a : words_b).add(captions[i]);
  }
  adi_a.merge(adi_b);
  amp_a.merge(amp_b);
  words_a.merge(words_b);
  const bool adi_ok = adi_a == adi_all &&
                      analytics::finalize(adi_a).adi_value == analytics::finalize(adi_all).adi_value;
  const bool amp_ok = amp_a == amp_all;
  const auto ra = words_a.report(analytics::default_stoplist(), 60);
  const auto rb = words_all.report(analytics::default_stoplist(), 60);
  bool words_ok = words_a == words_all && ra.mean_words == rb.mean_words && ra.std_words == rb.std_words &&
                  ra.top.size() == rb.top.size();
  for (std::size_t i = 0; words_ok && i < ra.top.size(); ++i) {
    words_ok = ra.top[i].word == rb.top[i].word && ra.top[i].captions == rb.top[i].captions;
  }
  return {adi_ok && amp_ok && words_ok, std::string("adi ") + (adi_ok ? "equal" : "DIFFERENT") + ", amplitude " +
                                            (amp_ok ? "equal" : "DIFFERENT") + ", words " +
                                            (words_ok ? "equal" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pipeline-counting-law", counting_law},
      {"cut-detection", cut_detection},
      {"border-crop-oracle", border_crop_oracle},
      {"silence-boundary", silence_boundary},
      {"adi-fixtures", adi_fixtures},
      {"parseval", parseval},
      {"amplitude-matrix", amplitude_matrix},
      {"packer-round-trip", packer_round_trip},
      {"determinism", determinism},
      {"merge-equivalence", merge_equivalence},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
