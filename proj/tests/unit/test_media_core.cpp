#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "avt/media_core.hpp"

using namespace avt;

TEST(Rational, NormalizesAndCompares) {
  EXPECT_EQ(Rational(60, 2), Rational(30));
  EXPECT_EQ(Rational(30000, 1001).num, 30000);
  EXPECT_EQ(Rational(-3, -6), Rational(1, 2));
  EXPECT_TRUE(Rational(1, 3) < Rational(1, 2));
  EXPECT_TRUE(Rational(2, 4) <= Rational(1, 2));
  EXPECT_THROW(Rational(1, 0), Error);
  EXPECT_EQ(Rational(5, 10).to_string(), "1/2");
}

TEST(Rational, FrameTimeIsExact) {
  EXPECT_EQ(frame_time(75, Rational(30)), Rational(5, 2));
  EXPECT_EQ(frame_time(12, Rational(25)), Rational(12, 25));
  // 30000/1001 fps: frame 30000 lands exactly on 1001 s.
  EXPECT_EQ(frame_time(30000, Rational(30000, 1001)), Rational(1001));
}

TEST(FrameBuffer, RejectsBadShapes) {
  EXPECT_THROW(FrameBuffer(0, 4, {}), Error);
  EXPECT_THROW(FrameBuffer(2, 2, std::vector<std::uint8_t>(11)), Error);
  EXPECT_NO_THROW(FrameBuffer(2, 2, std::vector<std::uint8_t>(12)));
}

TEST(FrameBuffer, AtIndexesRgbRowMajor) {
  std::vector<std::uint8_t> px(2 * 3 * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i);
  const FrameBuffer f(2, 3, px);
  EXPECT_EQ(f.at(0, 0, 0), 0);
  EXPECT_EQ(f.at(1, 0, 2), 5);
  EXPECT_EQ(f.at(0, 2, 1), 13);
}

TEST(MeanPixel, WorkedExamples) {
  EXPECT_DOUBLE_EQ(mean_pixel(FrameBuffer::filled(4, 4, {0, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(mean_pixel(FrameBuffer::filled(4, 4, {255, 255, 255})), 255.0);
  std::vector<std::uint8_t> px(4 * 4 * 3, 0);
  std::fill(px.begin(), px.begin() + static_cast<std::ptrdiff_t>(px.size() / 2), 20);
  EXPECT_DOUBLE_EQ(mean_pixel(FrameBuffer(4, 4, px)), 10.0);
}

TEST(MeanPixel, PermutationInvariantAndBounded) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> px(7 * 5 * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
    const double m = mean_pixel(FrameBuffer(7, 5, px));
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    EXPECT_GE(m, *lo);
    EXPECT_LE(m, *hi);
    std::shuffle(px.begin(), px.end(), rng);
    EXPECT_DOUBLE_EQ(mean_pixel(FrameBuffer(7, 5, px)), m);
  }
}

TEST(AudioClip, HoldsExactlyOneSecond) {
  EXPECT_EQ(AudioClip().samples().size(), kClipSamples);
  EXPECT_THROW(AudioClip(std::vector<std::int16_t>(15999)), Error);
  EXPECT_THROW(AudioClip(std::vector<std::int16_t>(16001)), Error);
  const AudioClip c(std::vector<std::int16_t>(16000, 7), Rational(3, 2));
  EXPECT_EQ(c.start_time(), Rational(3, 2));
  EXPECT_EQ(c.samples()[15999], 7);
}

TEST(FilterConfig, DefaultsAndValidation) {
  const FilterConfig f;
  EXPECT_EQ(f.border_threshold, 15);
  EXPECT_DOUBLE_EQ(f.cut_threshold, 90.0);
  EXPECT_EQ(f.silence_amp, 100);
  EXPECT_DOUBLE_EQ(f.silence_dur, 0.5);
  EXPECT_DOUBLE_EQ(f.dark_mean, 10.0);
  EXPECT_EQ(f.keep_every, 3);
  EXPECT_EQ(f.out_size, 512);
  EXPECT_EQ(f.min_crop_dim, 64);
  EXPECT_NO_THROW(f.validate());
  FilterConfig bad = f;
  bad.keep_every = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = f;
  bad.out_size = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = f;
  bad.cut_threshold = -1;
  EXPECT_THROW(bad.validate(), Error);
}
