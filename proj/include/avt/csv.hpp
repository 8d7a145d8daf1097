#pragma once

// RFC 4180 CSV: CRLF record separator, fields quoted only when they contain
// a comma, quote, CR or LF; embedded quotes doubled.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "avt/error.hpp"

namespace avt::csv {

inline bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_record(std::ostream& out, const std::vector<std::string_view>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << "\r\n";
}

/// Reads one record; nullopt at end of input. Accepts CRLF or bare LF.
inline std::optional<std::vector<std::string>> read_record(std::istream& in) {
  if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
  std::vector<std::string> fields(1);
  bool quoted = false;
  bool was_quoted = false;
  for (;;) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) {
      if (quoted) throw Error(ErrorKind::MalformedArchive, "unterminated quoted CSV field");
      return fields;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          fields.back() += '"';
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
      continue;
    }
    if (c == '"') {
      if (!fields.back().empty() || was_quoted) {
        throw Error(ErrorKind::MalformedArchive, "quote inside unquoted CSV field");
      }
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
      was_quoted = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      return fields;
    } else if (c == '\n') {
      return fields;
    } else {
      fields.back() += c;
    }
  }
}

}  // namespace avt::csv
