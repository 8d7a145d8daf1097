#include <random>

#include <gtest/gtest.h>

#include "avt/border_crop.hpp"
#include "oracles/oracles.hpp"

using namespace avt;

namespace {

FrameBuffer framed(int w, int h, int border, std::uint8_t inner) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3, 0);
  for (int y = border; y < h - border; ++y)
    for (int x = border; x < w - border; ++x)
      for (int c = 0; c < 3; ++c) px[(static_cast<std::size_t>(y) * w + x) * 3 + c] = inner;
  return FrameBuffer(w, h, px);
}

/// Small random frame: dark noise (<= threshold) everywhere, a random bright
/// region, and optionally scattered bright specks.
FrameBuffer planted(std::mt19937& rng, int threshold) {
  std::uniform_int_distribution<int> dim(1, 12);
  const int w = dim(rng), h = dim(rng);
  std::uniform_int_distribution<int> dark(0, threshold);
  std::uniform_int_distribution<int> bright(threshold + 1, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(dark(rng));
  std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1), ch(0, 2), count(1, 4);
  const int specks = count(rng);
  for (int i = 0; i < specks; ++i) {
    px[(static_cast<std::size_t>(ys(rng)) * w + xs(rng)) * 3 + ch(rng)] = static_cast<std::uint8_t>(bright(rng));
  }
  return FrameBuffer(w, h, px);
}

}  // namespace

TEST(ComputeCropBox, PlantedBorder) {
  const CropBox b = compute_crop_box(framed(100, 100, 10, 200), 15);
  EXPECT_EQ(b.x0, 10);
  EXPECT_EQ(b.y0, 10);
  EXPECT_EQ(b.w, 80);
  EXPECT_EQ(b.h, 80);
}

TEST(ComputeCropBox, NoBorderGivesFullFrame) {
  const CropBox b = compute_crop_box(FrameBuffer::filled(90, 70, {16, 16, 16}), 15);
  EXPECT_EQ(b.x0, 0);
  EXPECT_EQ(b.y0, 0);
  EXPECT_EQ(b.w, 90);
  EXPECT_EQ(b.h, 70);
}

TEST(ComputeCropBox, ThresholdIsStrict) {
  // Channel value exactly at the threshold is dark.
  EXPECT_THROW(compute_crop_box(FrameBuffer::filled(80, 80, {15, 15, 15}), 15), Error);
  try {
    compute_crop_box(FrameBuffer::filled(80, 80, {0, 0, 0}), 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FrameAllDark);
  }
}

TEST(ComputeCropBox, AnyChannelCounts) {
  std::vector<std::uint8_t> px(80 * 80 * 3, 0);
  for (std::size_t i = 2; i < px.size(); i += 3) px[i] = 16;  // only blue is lit
  const CropBox b = compute_crop_box(FrameBuffer(80, 80, px), 15);
  EXPECT_EQ(b.w, 80);
  EXPECT_EQ(b.h, 80);
}

TEST(ComputeCropBox, MinimumDimensionGuard) {
  EXPECT_THROW(compute_crop_box(framed(100, 100, 20, 200), 15, 61), Error);
  EXPECT_NO_THROW(compute_crop_box(framed(100, 100, 20, 200), 15, 60));
}

TEST(ComputeCropBox, MatchesBruteForceOracle) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int threshold = std::uniform_int_distribution<int>(0, 40)(rng);
    const FrameBuffer f = planted(rng, threshold);
    const auto expected = oracle::crop_boxes_bruteforce(f, threshold);
    ASSERT_EQ(expected.size(), 1u) << "trial " << trial;
    const CropBox got = compute_crop_box(f, threshold, 1);
    EXPECT_EQ(got.x0, expected[0].x0) << "trial " << trial;
    EXPECT_EQ(got.y0, expected[0].y0) << "trial " << trial;
    EXPECT_EQ(got.w, expected[0].w) << "trial " << trial;
    EXPECT_EQ(got.h, expected[0].h) << "trial " << trial;
  }
}

TEST(ComputeCropBox, IdempotentAfterCrop) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const FrameBuffer f = planted(rng, 15);
    const CropBox b = compute_crop_box(f, 15, 1);
    const FrameBuffer c = apply_crop(f, b);
    const CropBox again = compute_crop_box(c, 15, 1);
    EXPECT_EQ(again.x0, 0);
    EXPECT_EQ(again.y0, 0);
    EXPECT_EQ(again.w, c.width());
    EXPECT_EQ(again.h, c.height());
  }
}

TEST(ComputeCropBox, MonotoneInThreshold) {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> byte(0, 60);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint8_t> px(10 * 9 * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
    px[(4 * 10 + 5) * 3] = 255;  // at least one pixel survives every threshold
    const FrameBuffer f(10, 9, px);
    CropBox prev = compute_crop_box(f, 0, 1);
    for (int t = 1; t <= 60; ++t) {
      const CropBox b = compute_crop_box(f, t, 1);
      EXPECT_GE(b.x0, prev.x0);
      EXPECT_GE(b.y0, prev.y0);
      EXPECT_LE(b.x0 + b.w, prev.x0 + prev.w);
      EXPECT_LE(b.y0 + b.h, prev.y0 + prev.h);
      prev = b;
    }
  }
}

TEST(ApplyCrop, Examples) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> px(100 * 100 * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
  const FrameBuffer f(100, 100, px, Rational(7, 3));

  EXPECT_EQ(apply_crop(f, CropBox{0, 0, 100, 100}), f);
  const FrameBuffer c = apply_crop(f, CropBox{10, 10, 80, 80});
  EXPECT_EQ(c.width(), 80);
  EXPECT_EQ(c.height(), 80);
  EXPECT_EQ(c.timestamp(), Rational(7, 3));
  for (int ch = 0; ch < 3; ++ch) {
    EXPECT_EQ(c.at(0, 0, ch), f.at(10, 10, ch));
    EXPECT_EQ(c.at(79, 79, ch), f.at(89, 89, ch));
  }
  const FrameBuffer one = apply_crop(f, CropBox{42, 17, 1, 1});
  EXPECT_EQ(one.width(), 1);
  EXPECT_EQ(one.at(0, 0, 1), f.at(42, 17, 1));
}

TEST(ApplyCrop, OutOfBounds) {
  const FrameBuffer f = FrameBuffer::filled(10, 10, {1, 2, 3});
  for (const CropBox b : {CropBox{5, 0, 6, 10}, CropBox{-1, 0, 3, 3}, CropBox{0, 0, 0, 4}, CropBox{0, 9, 10, 2}}) {
    try {
      apply_crop(f, b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BoxOutOfBounds);
    }
  }
}
