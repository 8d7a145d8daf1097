#pragma once

// Plain zip archives (stored or raw deflate, no zip64, no encryption).
// Timestamps are pinned to 1980-01-01 so archives are reproducible.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "avt/error.hpp"

namespace avt::zip {

enum class Method : std::uint16_t { Stored = 0, Deflate = 8 };

struct Entry {
  std::string name;
  std::vector<std::uint8_t> data;
};

namespace detail {

inline void u16(std::vector<std::uint8_t>& o, std::uint32_t v) {
  o.push_back(static_cast<std::uint8_t>(v));
  o.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void u32(std::vector<std::uint8_t>& o, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint32_t r16(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 2 > b.size()) throw Error(ErrorKind::MalformedArchive, "read past end");
  return b[at] | (b[at + 1] << 8);
}
inline std::uint32_t r32(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 4 > b.size()) throw Error(ErrorKind::MalformedArchive, "read past end");
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

constexpr std::uint32_t kDosTime = 0;
constexpr std::uint32_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01

inline std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw Error(ErrorKind::IoError, "inflateInit2 failed");
  // One spare byte: zlib rejects a null output buffer, and an overlong
  // stream then shows up as total_out > expected.
  std::vector<std::uint8_t> out(expected + 1);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) {
    throw Error(ErrorKind::MalformedArchive, "corrupt deflate stream");
  }
  out.resize(expected);
  return out;
}

}  // namespace detail

inline std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(::crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

/// Streams entries into an archive file. Local headers are patched with the
/// sizes and CRC once each entry's body has been written.
class Writer {
 public:
  explicit Writer(const std::string& path, Method method = Method::Deflate)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc), method_(method) {
    if (!out_) throw Error(ErrorKind::IoError, "cannot create " + path);
  }

  void add(const std::string& name, std::span<const std::uint8_t> data) {
    std::size_t pos = 0;
    add_stream(name, [&](std::span<std::uint8_t> buf) {
      const std::size_t n = std::min(buf.size(), data.size() - pos);
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(pos), n, buf.begin());
      pos += n;
      return n;
    });
  }

  void add_file(const std::string& name, const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + file);
    add_stream(name, [&](std::span<std::uint8_t> buf) {
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      return static_cast<std::size_t>(in.gcount());
    });
  }

  /// Writes the central directory. The archive is incomplete until called.
  void finish() {
    if (finished_) return;
    if (records_.size() > 0xFFFF) throw Error(ErrorKind::IoError, "too many zip entries");
    const std::uint64_t cd_offset = tell();
    std::vector<std::uint8_t> central;
    for (const Record& r : records_) {
      detail::u32(central, 0x02014b50);
      detail::u16(central, 20);
      detail::u16(central, 20);
      detail::u16(central, 0x0800);
      detail::u16(central, static_cast<std::uint16_t>(r.method));
      detail::u16(central, detail::kDosTime);
      detail::u16(central, detail::kDosDate);
      detail::u32(central, r.crc);
      detail::u32(central, r.packed);
      detail::u32(central, r.size);
      detail::u16(central, static_cast<std::uint32_t>(r.name.size()));
      for (int i = 0; i < 4; ++i) detail::u16(central, 0);
      detail::u32(central, 0);
      detail::u32(central, r.offset);
      central.insert(central.end(), r.name.begin(), r.name.end());
    }
    std::vector<std::uint8_t> eocd;
    detail::u32(eocd, 0x06054b50);
    detail::u16(eocd, 0);
    detail::u16(eocd, 0);
    detail::u16(eocd, static_cast<std::uint32_t>(records_.size()));
    detail::u16(eocd, static_cast<std::uint32_t>(records_.size()));
    detail::u32(eocd, static_cast<std::uint32_t>(central.size()));
    detail::u32(eocd, checked32(cd_offset));
    detail::u16(eocd, 0);
    write(central);
    write(eocd);
    out_.flush();
    if (!out_) throw Error(ErrorKind::IoError, "write failed: " + path_);
    out_.close();
    finished_ = true;
  }

 private:
  struct Record {
    std::string name;
    Method method;
    std::uint32_t crc, packed, size, offset;
  };

  template <typename Source>
  void add_stream(const std::string& name, Source&& next_chunk) {
    const std::uint64_t offset = tell();
    std::vector<std::uint8_t> header;
    detail::u32(header, 0x04034b50);
    detail::u16(header, 20);
    detail::u16(header, 0x0800);  // UTF-8 names
    detail::u16(header, static_cast<std::uint16_t>(method_));
    detail::u16(header, detail::kDosTime);
    detail::u16(header, detail::kDosDate);
    detail::u32(header, 0);  // crc, patched
    detail::u32(header, 0);  // compressed size, patched
    detail::u32(header, 0);  // size, patched
    detail::u16(header, static_cast<std::uint32_t>(name.size()));
    detail::u16(header, 0);
    header.insert(header.end(), name.begin(), name.end());
    write(header);

    std::vector<std::uint8_t> in(1 << 16);
    std::vector<std::uint8_t> zbuf(1 << 16);
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::uint64_t size = 0;
    std::uint64_t packed = 0;
    z_stream zs{};
    if (method_ == Method::Deflate &&
        deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
      throw Error(ErrorKind::IoError, "deflateInit2 failed");
    }
    for (;;) {
      const std::size_t n = next_chunk(std::span<std::uint8_t>(in));
      crc = ::crc32(crc, in.data(), static_cast<uInt>(n));
      size += n;
      if (method_ == Method::Stored) {
        write(std::span<const std::uint8_t>(in.data(), n));
        packed += n;
        if (n == 0) break;
        continue;
      }
      zs.next_in = in.data();
      zs.avail_in = static_cast<uInt>(n);
      const int flush = n == 0 ? Z_FINISH : Z_NO_FLUSH;
      int rc = Z_OK;
      do {
        zs.next_out = zbuf.data();
        zs.avail_out = static_cast<uInt>(zbuf.size());
        rc = deflate(&zs, flush);
        const std::size_t produced = zbuf.size() - zs.avail_out;
        write(std::span<const std::uint8_t>(zbuf.data(), produced));
        packed += produced;
      } while (zs.avail_out == 0 || (flush == Z_FINISH && rc != Z_STREAM_END));
      if (n == 0) break;
    }
    if (method_ == Method::Deflate) deflateEnd(&zs);

    const std::uint64_t end = tell();
    Record r{name, method_, static_cast<std::uint32_t>(crc), checked32(packed), checked32(size), checked32(offset)};
    std::vector<std::uint8_t> patch;
    detail::u32(patch, r.crc);
    detail::u32(patch, r.packed);
    detail::u32(patch, r.size);
    out_.seekp(static_cast<std::streamoff>(offset + 14));
    write(patch);
    out_.seekp(static_cast<std::streamoff>(end));
    checked32(end);
    records_.push_back(std::move(r));
  }

  static std::uint32_t checked32(std::uint64_t v) {
    if (v > 0xFFFFFFFFull) throw Error(ErrorKind::IoError, "zip archive would exceed 4 GiB");
    return static_cast<std::uint32_t>(v);
  }

  std::uint64_t tell() { return static_cast<std::uint64_t>(out_.tellp()); }

  void write(std::span<const std::uint8_t> bytes) {
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw Error(ErrorKind::IoError, "write failed: " + path_);
  }

  std::string path_;
  std::ofstream out_;
  Method method_;
  std::vector<Record> records_;
  bool finished_ = false;
};

/// Reads every entry of an in-memory archive, verifying CRCs.
inline std::vector<Entry> read(std::span<const std::uint8_t> bytes) {
  using detail::r16;
  using detail::r32;
  if (bytes.size() < 22) throw Error(ErrorKind::MalformedArchive, "too short for a zip archive");
  std::size_t eocd = bytes.size() - 22;
  for (;;) {
    if (r32(bytes, eocd) == 0x06054b50) break;
    if (eocd == 0 || bytes.size() - eocd > 22 + 0xFFFF) {
      throw Error(ErrorKind::MalformedArchive, "end of central directory not found");
    }
    --eocd;
  }
  const std::uint32_t count = r16(bytes, eocd + 10);
  std::size_t at = r32(bytes, eocd + 16);
  std::vector<Entry> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (r32(bytes, at) != 0x02014b50) throw Error(ErrorKind::MalformedArchive, "bad central directory entry");
    const auto method = static_cast<Method>(r16(bytes, at + 10));
    const std::uint32_t crc = r32(bytes, at + 16);
    const std::uint32_t packed_size = r32(bytes, at + 20);
    const std::uint32_t size = r32(bytes, at + 24);
    const std::uint32_t name_len = r16(bytes, at + 28);
    const std::uint32_t extra_len = r16(bytes, at + 30);
    const std::uint32_t comment_len = r16(bytes, at + 32);
    const std::uint32_t local = r32(bytes, at + 42);
    if (at + 46 + name_len > bytes.size()) throw Error(ErrorKind::MalformedArchive, "truncated name");
    Entry e;
    e.name.assign(reinterpret_cast<const char*>(bytes.data() + at + 46), name_len);
    at += 46 + name_len + extra_len + comment_len;

    if (r32(bytes, local) != 0x04034b50) throw Error(ErrorKind::MalformedArchive, "bad local header");
    const std::size_t data_at = local + 30 + r16(bytes, local + 26) + r16(bytes, local + 28);
    if (data_at + packed_size > bytes.size()) throw Error(ErrorKind::MalformedArchive, "truncated entry data");
    const auto body = bytes.subspan(data_at, packed_size);
    if (method == Method::Stored) {
      e.data.assign(body.begin(), body.end());
    } else if (method == Method::Deflate) {
      e.data = detail::inflate_raw(body, size);
    } else {
      throw Error(ErrorKind::MalformedArchive, "unsupported compression method");
    }
    if (crc32_of(e.data) != crc) throw Error(ErrorKind::MalformedArchive, "CRC mismatch in " + e.name);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace avt::zip
