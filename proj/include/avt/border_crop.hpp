#pragma once

// Black-border removal. A border row or column is peeled while none of its
// pixels has a channel strictly above the threshold.

#include <cstdint>
#include <vector>

#include "avt/media_core.hpp"

namespace avt {

struct CropBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const CropBox&, const CropBox&) = default;

  bool fits(int width, int height) const {
    return x0 >= 0 && y0 >= 0 && w >= 1 && h >= 1 && x0 + w <= width && y0 + h <= height;
  }
};

namespace detail {

inline bool is_bright(const FrameBuffer& f, int x, int y, int threshold) {
  return f.at(x, y, 0) > threshold || f.at(x, y, 1) > threshold || f.at(x, y, 2) > threshold;
}

inline bool row_has_bright(const FrameBuffer& f, int y, int x_begin, int x_end, int threshold) {
  for (int x = x_begin; x < x_end; ++x) {
    if (is_bright(f, x, y, threshold)) return true;
  }
  return false;
}

inline bool col_has_bright(const FrameBuffer& f, int x, int y_begin, int y_end, int threshold) {
  for (int y = y_begin; y < y_end; ++y) {
    if (is_bright(f, x, y, threshold)) return true;
  }
  return false;
}

}  // namespace detail

/// Peels dark first/last rows and columns until all four edges carry a pixel
/// brighter than `threshold`. Throws FrameAllDark when nothing survives or the
/// remaining box is narrower than `min_dim` in either direction.
inline CropBox compute_crop_box(const FrameBuffer& frame, int threshold, int min_dim = 64) {
  int top = 0;
  int bottom = frame.height();  // exclusive
  int left = 0;
  int right = frame.width();  // exclusive

  bool changed = true;
  while (changed && top < bottom && left < right) {
    changed = false;
    if (top < bottom && !detail::row_has_bright(frame, top, left, right, threshold)) {
      ++top;
      changed = true;
    }
    if (top < bottom && !detail::row_has_bright(frame, bottom - 1, left, right, threshold)) {
      --bottom;
      changed = true;
    }
    if (left < right && !detail::col_has_bright(frame, left, top, bottom, threshold)) {
      ++left;
      changed = true;
    }
    if (left < right && !detail::col_has_bright(frame, right - 1, top, bottom, threshold)) {
      --right;
      changed = true;
    }
  }

  const int w = right - left;
  const int h = bottom - top;
  if (w <= 0 || h <= 0) throw Error(ErrorKind::FrameAllDark, "no pixel above border threshold");
  if (w < min_dim || h < min_dim) {
    throw Error(ErrorKind::FrameAllDark, "crop box " + std::to_string(w) + "x" + std::to_string(h) +
                                             " is below the minimum dimension " +
                                             std::to_string(min_dim));
  }
  return CropBox{left, top, w, h};
}

inline FrameBuffer apply_crop(const FrameBuffer& frame, const CropBox& box) {
  if (!box.fits(frame.width(), frame.height())) {
    throw Error(ErrorKind::BoxOutOfBounds, "crop box does not fit the frame");
  }
  if (box.x0 == 0 && box.y0 == 0 && box.w == frame.width() && box.h == frame.height()) {
    return frame;
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(box.w) * box.h * 3);
  const auto src = frame.pixels();
  const std::size_t row_bytes = static_cast<std::size_t>(box.w) * 3;
  for (int y = 0; y < box.h; ++y) {
    const std::size_t from = (static_cast<std::size_t>(box.y0 + y) * frame.width() + box.x0) * 3;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), row_bytes,
                out.begin() + static_cast<std::ptrdiff_t>(y * row_bytes));
  }
  return FrameBuffer(box.w, box.h, std::move(out), frame.timestamp());
}

}  // namespace avt
