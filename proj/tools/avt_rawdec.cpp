// avt-rawdec: a decoder for synthetic test videos that speaks the same
// contract as the ffprobe/ffmpeg templates.
//
//   avt-rawdec probe|video|audio <file>
//
// A "video" file is a text script:
//
//   video width=640 height=480 fps=30/1
//   scene frames=300 fill=128,128,128 [noise=N seed=S] [border=B border_fill=r,g,b]
//     (noise is a fixed texture, identical on every frame of the scene)
//   fade frames=30 from=0,0,0 to=255,255,255
//   tone samples=160000 freq=440 amp=8000
//   silence samples=48000
//   noise samples=16000 amp=3000 seed=7
//   constant samples=16000 value=100
//   crash_after_frames n=120
//
// Scenes and fades append frames, the audio lines append samples. Without a
// `video` line the file has an audio stream only; without audio lines it has
// a video stream only. Empty or unparsable files fail every subcommand.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Rgb {
  int r = 0, g = 0, b = 0;
};

struct VideoPart {
  bool fade = false;
  long frames = 0;
  Rgb fill, to;
  int noise = 0;
  unsigned seed = 0;
  int border = 0;
  Rgb border_fill;
};

struct AudioPart {
  std::string kind;
  long samples = 0;
  double freq = 0;
  int amp = 0;
  unsigned seed = 0;
  int value = 0;
};

struct Script {
  bool has_video = false;
  int width = 0, height = 0;
  long fps_num = 0, fps_den = 1;
  long crash_after = -1;
  std::vector<VideoPart> video;
  std::vector<AudioPart> audio;

  long frame_count() const {
    long n = 0;
    for (const auto& p : video) n += p.frames;
    return n;
  }
  long sample_count() const {
    long n = 0;
    for (const auto& p : audio) n += p.samples;
    return n;
  }
};

[[noreturn]] void fail(const std::string& why) {
  std::cerr << "avt-rawdec: " << why << "\n";
  std::exit(1);
}

Rgb parse_rgb(const std::string& s) {
  Rgb c;
  if (std::sscanf(s.c_str(), "%d,%d,%d", &c.r, &c.g, &c.b) != 3) fail("bad colour '" + s + "'");
  return c;
}

Script parse(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  Script s;
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head) || head[0] == '#') continue;
    std::map<std::string, std::string> kv;
    for (std::string tok; ls >> tok;) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) fail("expected key=value, got '" + tok + "'");
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto num = [&](const char* key, long fallback) { return kv.contains(key) ? std::stol(kv[key]) : fallback; };
    any = true;
    if (head == "video") {
      s.has_video = true;
      s.width = static_cast<int>(num("width", 0));
      s.height = static_cast<int>(num("height", 0));
      const std::string fps = kv.contains("fps") ? kv["fps"] : "30/1";
      if (std::sscanf(fps.c_str(), "%ld/%ld", &s.fps_num, &s.fps_den) < 1) fail("bad fps");
      if (s.width <= 0 || s.height <= 0 || s.fps_num <= 0 || s.fps_den <= 0) fail("bad video line");
    } else if (head == "scene" || head == "fade") {
      VideoPart p;
      p.fade = head == "fade";
      p.frames = num("frames", 0);
      p.fill = parse_rgb(kv.contains("fill") ? kv["fill"] : kv.contains("from") ? kv["from"] : "0,0,0");
      p.to = kv.contains("to") ? parse_rgb(kv["to"]) : p.fill;
      p.noise = static_cast<int>(num("noise", 0));
      p.seed = static_cast<unsigned>(num("seed", 1));
      p.border = static_cast<int>(num("border", 0));
      p.border_fill = kv.contains("border_fill") ? parse_rgb(kv["border_fill"]) : Rgb{};
      s.video.push_back(p);
    } else if (head == "tone" || head == "silence" || head == "noise" || head == "constant") {
      AudioPart p;
      p.kind = head;
      p.samples = num("samples", 0);
      p.freq = kv.contains("freq") ? std::stod(kv["freq"]) : 440.0;
      p.amp = static_cast<int>(num("amp", 8000));
      p.seed = static_cast<unsigned>(num("seed", 1));
      p.value = static_cast<int>(num("value", 0));
      s.audio.push_back(p);
    } else if (head == "crash_after_frames") {
      s.crash_after = num("n", 0);
    } else {
      fail("unknown directive '" + head + "'");
    }
  }
  if (!any) fail(path + ": not a fixture script");
  return s;
}

int clamp8(int v) { return v < 0 ? 0 : v > 255 ? 255 : v; }

void write_all(const void* data, std::size_t n) {
  if (std::fwrite(data, 1, n, stdout) != n) std::exit(1);
}

void emit_video(const Script& s) {
  if (!s.has_video) fail("no video stream");
  std::vector<std::uint8_t> frame(static_cast<std::size_t>(s.width) * s.height * 3);
  long index = 0;
  for (const auto& p : s.video) {
    std::uniform_int_distribution<int> jitter(-p.noise, p.noise);
    for (long f = 0; f < p.frames; ++f, ++index) {
      std::mt19937 rng(p.seed);  // same texture on every frame of the scene
      if (index == s.crash_after) {
        std::fflush(stdout);
        std::exit(3);
      }
      Rgb c = p.fill;
      if (p.fade && p.frames > 1) {
        const double t = static_cast<double>(f) / static_cast<double>(p.frames - 1);
        c = Rgb{static_cast<int>(std::lround(p.fill.r + (p.to.r - p.fill.r) * t)),
                static_cast<int>(std::lround(p.fill.g + (p.to.g - p.fill.g) * t)),
                static_cast<int>(std::lround(p.fill.b + (p.to.b - p.fill.b) * t))};
      }
      std::size_t i = 0;
      for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x, i += 3) {
          const bool edge = x < p.border || y < p.border || x >= s.width - p.border || y >= s.height - p.border;
          const Rgb& px = edge ? p.border_fill : c;
          const int j = p.noise > 0 && !edge ? jitter(rng) : 0;
          frame[i] = static_cast<std::uint8_t>(clamp8(px.r + j));
          frame[i + 1] = static_cast<std::uint8_t>(clamp8(px.g + j));
          frame[i + 2] = static_cast<std::uint8_t>(clamp8(px.b + j));
        }
      }
      write_all(frame.data(), frame.size());
    }
  }
}

void emit_audio(const Script& s) {
  if (s.audio.empty()) fail("no audio stream");
  long n = 0;
  std::vector<std::uint8_t> buf;
  for (const auto& p : s.audio) {
    std::mt19937 rng(p.seed);
    std::uniform_int_distribution<int> noise(-p.amp, p.amp);
    buf.clear();
    for (long i = 0; i < p.samples; ++i, ++n) {
      int v = 0;
      if (p.kind == "tone") {
        v = static_cast<int>(std::lround(p.amp * std::sin(2.0 * std::numbers::pi * p.freq * static_cast<double>(n) / 16000.0)));
      } else if (p.kind == "noise") {
        v = noise(rng);
      } else if (p.kind == "constant") {
        v = p.value;
      }
      const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
      buf.push_back(static_cast<std::uint8_t>(u & 0xff));
      buf.push_back(static_cast<std::uint8_t>(u >> 8));
    }
    write_all(buf.data(), buf.size());
  }
}

void emit_probe(const Script& s) {
  double duration = 0.0;
  if (s.has_video) {
    std::printf("codec_type=video\nwidth=%d\nheight=%d\nr_frame_rate=%ld/%ld\n", s.width, s.height, s.fps_num,
                s.fps_den);
    duration = static_cast<double>(s.frame_count()) * s.fps_den / s.fps_num;
  }
  if (!s.audio.empty()) {
    std::printf("codec_type=audio\n");
    duration = std::max(duration, static_cast<double>(s.sample_count()) / 16000.0);
  }
  std::printf("duration=%.6f\n", duration);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: avt-rawdec probe|video|audio <file>\n";
    return 2;
  }
  const std::string mode = argv[1];
  const Script s = parse(argv[2]);
  if (mode == "probe") {
    emit_probe(s);
  } else if (mode == "video") {
    emit_video(s);
  } else if (mode == "audio") {
    emit_audio(s);
  } else {
    fail("unknown mode " + mode);
  }
  return std::fflush(stdout) == 0 ? 0 : 1;
}
