#pragma once

// JPEG (libjpeg) and PNG (libpng) encode/decode of RGB24 frames.

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "avt/media_core.hpp"

namespace avt {

enum class ImageFormat { Jpeg, Png };

inline std::string_view extension(ImageFormat f) { return f == ImageFormat::Jpeg ? "jpg" : "png"; }

namespace detail {

struct JpegErrorState {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, state->message);
  std::longjmp(state->jump, 1);
}

inline void jpeg_silent(j_common_ptr, int) {}

}  // namespace detail

/// Baseline JPEG with 4:2:0 chroma; output depends only on pixels and quality.
inline std::vector<std::uint8_t> encode_jpeg(const FrameBuffer& frame, int quality = 90) {
  jpeg_compress_struct cinfo{};
  detail::JpegErrorState err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = detail::jpeg_error_exit;
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    throw Error(ErrorKind::IoError, std::string("jpeg encode: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(frame.width());
  cinfo.image_height = static_cast<JDIMENSION>(frame.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const auto px = frame.pixels();
  const std::size_t stride = static_cast<std::size_t>(frame.width()) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(px.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(mem, mem + mem_size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return out;
}

inline FrameBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  detail::JpegErrorState err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = detail::jpeg_error_exit;
  err.mgr.emit_message = detail::jpeg_silent;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorKind::MalformedImage, std::string("jpeg decode: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = px.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return FrameBuffer(w, h, std::move(px));
}

namespace detail {

struct PngWriteSink {
  std::vector<std::uint8_t>* out;
};

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<PngWriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + len);
}

inline void png_flush_noop(png_structp) {}

struct PngReadSource {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

inline void png_read_from_span(png_structp png, png_bytep data, png_size_t len) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + len > src->bytes.size()) png_error(png, "unexpected end of data");
  std::memcpy(data, src->bytes.data() + src->offset, len);
  src->offset += len;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const FrameBuffer& frame) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::IoError, "png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::IoError, "png encode failed");
  }
  detail::PngWriteSink sink{&out};
  png_set_write_fn(png, &sink, detail::png_write_to_vector, detail::png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width()), static_cast<png_uint_32>(frame.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto px = frame.pixels();
  const std::size_t stride = static_cast<std::size_t>(frame.width()) * 3;
  for (int y = 0; y < frame.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(px.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline FrameBuffer decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorKind::MalformedImage, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::IoError, "png: allocation failed");
  }
  std::vector<std::uint8_t> px;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::MalformedImage, "png decode failed");
  }
  detail::PngReadSource src{bytes, 0};
  png_set_read_fn(png, &src, detail::png_read_from_span);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  px.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = px.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return FrameBuffer(w, h, std::move(px));
}

inline std::vector<std::uint8_t> encode_image(const FrameBuffer& frame, ImageFormat format, int quality = 90) {
  return format == ImageFormat::Jpeg ? encode_jpeg(frame, quality) : encode_png(frame);
}

/// Sniffs the format from the magic bytes.
inline FrameBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) return decode_jpeg(bytes);
  return decode_png(bytes);
}

}  // namespace avt
