#pragma once

// Image captioning behind a pluggable captioner.
//
// Plugin protocol, one line each way per image over the plugin's stdin/stdout:
//   request:  CAPTION <absolute image path>
//   response: OK <caption text>   |   ERR <message>
// The plugin reads AVT_MIN_TOKENS, AVT_MAX_TOKENS and AVT_BEAMS from its
// environment.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avt/error.hpp"
#include "avt/subprocess.hpp"

namespace avt {

enum class CaptionerKind { Mock, External };

struct CaptionerSpec {
  CaptionerKind kind = CaptionerKind::Mock;
  std::string command;
  int min_tokens = 10;
  int max_tokens = 20;
  int beams = 2;
  int min_words = 1;
  int max_words = 20;
  int timeout_ms = 120000;

  void validate() const {
    if (min_tokens > max_tokens) throw Error(ErrorKind::InvalidArgument, "min_tokens exceeds max_tokens");
    if (min_words < 1 || min_words > max_words) throw Error(ErrorKind::InvalidArgument, "bad caption word bounds");
    if (kind == CaptionerKind::External && command.empty()) {
      throw Error(ErrorKind::InvalidArgument, "external captioner needs a command");
    }
  }
};

struct CaptionedRecord {
  std::int64_t global_id = 0;
  std::string text;

  friend bool operator==(const CaptionedRecord&, const CaptionedRecord&) = default;
};

/// Whitespace-separated word count.
inline std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

/// Reason a caption is unusable, or nullopt when it passes.
inline std::optional<std::string> validate_caption(std::string_view text, int min_words = 1, int max_words = 20) {
  if (text.empty()) return "empty";
  if (text.find_first_of("\r\n") != std::string_view::npos) return "multi-line";
  if (text.find('\t') != std::string_view::npos) return "contains tab";
  const auto n = static_cast<int>(count_words(text));
  if (n == 0) return "empty";
  if (n < min_words) return "too short (" + std::to_string(n) + " words)";
  if (n > max_words) return "too long (" + std::to_string(n) + " words)";
  return std::nullopt;
}

inline std::uint32_t fnv1a32(std::span<const std::uint8_t> bytes) {
  std::uint32_t h = 2166136261u;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 16777619u;
  }
  return h;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Deterministic stand-in captioner: a pure function of image bytes and id.
inline std::string mock_caption(std::span<const std::uint8_t> image_bytes, std::int64_t global_id) {
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", fnv1a32(image_bytes));
  return "synthetic caption for pair " + std::to_string(global_id) + " hash " + hex;
}

/// Client side of one long-lived plugin process. Any protocol violation
/// kills the process; the next request respawns it.
class PluginCaptioner {
 public:
  explicit PluginCaptioner(CaptionerSpec spec) : spec_(std::move(spec)) {}

  /// Returns the caption or throws CaptionerFailure.
  std::string caption(const std::string& image_path) {
    try {
      return request(image_path);
    } catch (const Error&) {
      proc_.reset();
      buffer_.clear();
      throw;
    }
  }

 private:
  static Error failure(const std::string& why) { return Error(ErrorKind::CaptionerFailure, why); }

  void ensure_running() {
    if (proc_) return;
    Subprocess::Options opts;
    opts.pipe_stdin = true;
    opts.pipe_stdout = true;
    opts.extra_env = {{"AVT_MIN_TOKENS", std::to_string(spec_.min_tokens)},
                      {"AVT_MAX_TOKENS", std::to_string(spec_.max_tokens)},
                      {"AVT_BEAMS", std::to_string(spec_.beams)}};
    proc_ = std::make_unique<Subprocess>(spec_.command, opts);
  }

  std::string request(const std::string& image_path) {
    ensure_running();
    if (!buffer_.empty() || proc_->has_pending_data()) throw failure("unsolicited output from plugin");
    if (!proc_->write_all("CAPTION " + image_path + "\n")) throw failure("plugin closed its input");
    const std::string line = read_line();
    if (!buffer_.empty() || proc_->has_pending_data()) throw failure("plugin emitted more than one line");
    if (line.rfind("OK ", 0) == 0) {
      std::string text = line.substr(3);
      if (auto bad = validate_caption(text, spec_.min_words, spec_.max_words)) {
        throw failure("invalid caption: " + *bad);
      }
      return text;
    }
    if (line.rfind("ERR", 0) == 0) throw failure("plugin error:" + line.substr(3));
    throw failure("malformed response line");
  }

  std::string read_line() {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (!proc_->readable(spec_.timeout_ms)) throw failure("plugin timed out");
      std::uint8_t chunk[4096];
      const std::size_t n = proc_->read_some(chunk);
      if (n == 0) throw failure("plugin exited (status " + std::to_string(proc_->wait()) + ")");
      buffer_.append(reinterpret_cast<const char*>(chunk), n);
    }
  }

  CaptionerSpec spec_;
  std::unique_ptr<Subprocess> proc_;
  std::string buffer_;
};

/// One captioner per worker thread.
class Captioner {
 public:
  explicit Captioner(const CaptionerSpec& spec) : spec_(spec) {
    if (spec.kind == CaptionerKind::External) plugin_.emplace(spec);
  }

  std::string caption(const std::string& image_path, std::int64_t global_id) {
    if (spec_.kind == CaptionerKind::Mock) {
      std::string text = mock_caption(read_file_bytes(image_path), global_id);
      if (auto bad = validate_caption(text, spec_.min_words, spec_.max_words)) {
        throw Error(ErrorKind::CaptionerFailure, "invalid caption: " + *bad);
      }
      return text;
    }
    return plugin_->caption(image_path);
  }

 private:
  CaptionerSpec spec_;
  std::optional<PluginCaptioner> plugin_;
};

/// Retries once, then reports the failure reason instead of a caption.
struct CaptionOutcome {
  std::optional<std::string> text;
  std::string drop_reason;
};

inline CaptionOutcome caption_with_retry(Captioner& captioner, const std::string& image_path, std::int64_t id) {
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      return CaptionOutcome{captioner.caption(image_path, id), {}};
    } catch (const Error& e) {
      last = e.what();
    }
  }
  return CaptionOutcome{std::nullopt, last};
}

}  // namespace avt
