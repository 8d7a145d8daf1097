#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avt {

enum class ErrorKind {
  InvalidArgument,
  UnreadableMedia,
  DecoderCrash,
  FrameAllDark,
  BoxOutOfBounds,
  DimensionMismatch,
  NoFrameInWindow,
  CaptionerFailure,
  MalformedWav,
  WrongFormat,
  MalformedImage,
  MalformedArchive,
  IoError,
  EmptyCorpus,
  AllSilent,
  OutOfRange,
  NotNormalized,
  NoInput,
  AllDropped,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnreadableMedia: return "UnreadableMedia";
    case ErrorKind::DecoderCrash: return "DecoderCrash";
    case ErrorKind::FrameAllDark: return "FrameAllDark";
    case ErrorKind::BoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoFrameInWindow: return "NoFrameInWindow";
    case ErrorKind::CaptionerFailure: return "CaptionerFailure";
    case ErrorKind::MalformedWav: return "MalformedWav";
    case ErrorKind::WrongFormat: return "WrongFormat";
    case ErrorKind::MalformedImage: return "MalformedImage";
    case ErrorKind::MalformedArchive: return "MalformedArchive";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::AllSilent: return "AllSilent";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NoInput: return "NoInput";
    case ErrorKind::AllDropped: return "AllDropped";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace avt
