// Copyright 2026 The degradekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "degradekit/error.h"
#include "degradekit/image.h"
#include "degradekit/rng.h"

namespace degradekit {
namespace {

const std::string kData = DEGRADEKIT_TEST_DATA;

ImageBuf RandomImage(int w, int h, int c, uint64_t seed) {
  CounterRng rng(seed);
  ImageBuf img(w, h, c);
  for (uint8_t& v : img.data()) v = static_cast<uint8_t>(rng.NextU64() & 0xff);
  return img;
}

// Reference planes are stored on the 0-255 scale: "w h c" then w*h*c values.
FloatPlane LoadReference(const std::string& name) {
  std::ifstream in(kData + "/" + name);
  EXPECT_TRUE(in) << name;
  int w = 0, h = 0, c = 0;
  in >> w >> h >> c;
  std::vector<double> v(static_cast<size_t>(w) * h * c);
  for (double& x : v) in >> x;
  return FloatPlane(w, h, c, std::move(v));
}

TEST(ImageBufTest, RejectsInconsistentData) {
  EXPECT_THROW(ImageBuf(2, 2, 3, std::vector<uint8_t>(11)), InvalidArgument);
  EXPECT_THROW(ImageBuf(0, 4, 3), InvalidArgument);
  EXPECT_THROW(ImageBuf(4, 4, 2), InvalidArgument);
  EXPECT_THROW(ImageBuf(16385, 1, 1), InvalidArgument);
  EXPECT_NO_THROW(ImageBuf(2, 2, 1, std::vector<uint8_t>(4)));
}

TEST(ImageBufTest, InterleavedLayout) {
  ImageBuf img(3, 2, 3);
  img.at(2, 1, 1) = 77;
  EXPECT_EQ(img.data()[(1 * 3 + 2) * 3 + 1], 77);
}

TEST(ToFloatTest, ExactDivision) {
  ImageBuf img(3, 1, 1, {0, 51, 255});
  const FloatPlane f = ToFloat(img);
  EXPECT_EQ(f.at(0, 0, 0), 0.0);
  EXPECT_EQ(f.at(1, 0, 0), 0.2);
  EXPECT_EQ(f.at(2, 0, 0), 1.0);
}

TEST(QuantizeTest, Examples) {
  EXPECT_EQ(QuantizeSample(0.75196), 192);
  EXPECT_EQ(QuantizeSample(1.2), 255);
  EXPECT_EQ(QuantizeSample(-0.1), 0);
  EXPECT_EQ(QuantizeSample(std::nan("")), 0);
  EXPECT_EQ(QuantizeSample(0.5 / 255.0), 1);  // half rounds up
}

TEST(QuantizeTest, RoundTripIsExact) {
  for (int v = 0; v < 256; ++v) {
    EXPECT_EQ(QuantizeSample(v / 255.0), v);
  }
  const ImageBuf img = RandomImage(31, 17, 3, 5);
  EXPECT_EQ(Quantize(ToFloat(img)), img);
}

TEST(ResizeTest, ConstantImageStaysConstant) {
  FloatPlane p(23, 19, 3);
  for (double& v : p.data()) v = 0.3137;
  for (auto [w, h] : {std::pair{112, 112}, {5, 7}, {1, 1}, {40, 3}}) {
    const FloatPlane out = ResizeBicubic(p, w, h);
    ASSERT_EQ(out.width(), w);
    ASSERT_EQ(out.height(), h);
    for (double v : out.data()) EXPECT_NEAR(v, 0.3137, 1e-6);
  }
}

TEST(ResizeTest, SameSizeIsIdentity) {
  const FloatPlane p = ToFloat(RandomImage(17, 9, 3, 9));
  const FloatPlane out = ResizeBicubic(p, 17, 9);
  for (size_t i = 0; i < p.data().size(); ++i) {
    EXPECT_NEAR(out.data()[i], p.data()[i], 1e-6);
  }
}

TEST(ResizeTest, RejectsZeroTarget) {
  const FloatPlane p(4, 4, 1);
  EXPECT_THROW(ResizeBicubic(p, 0, 4), InvalidArgument);
  EXPECT_THROW(ResizeBicubic(p, 4, 0), InvalidArgument);
}

struct OracleCase {
  const char* file;
  const char* input;  // PNG the reference was computed from
};

class PillowFloatTest : public ::testing::TestWithParam<OracleCase> {};

TEST_P(PillowFloatTest, MatchesReferenceResampler) {
  const OracleCase& tc = GetParam();
  const FloatPlane ref = LoadReference(tc.file);
  const ImageBuf in = ReadPng(kData + "/" + tc.input);
  const FloatPlane out = ResizeBicubic(ToFloat(in), ref.width(), ref.height());
  ASSERT_EQ(out.channels(), ref.channels());
  double max_err = 0;
  int max_level = 0;
  for (size_t i = 0; i < ref.data().size(); ++i) {
    max_err = std::max(max_err, std::fabs(out.data()[i] * 255 - ref.data()[i]));
    const int a = QuantizeSample(out.data()[i]);
    const int b = QuantizeSample(ref.data()[i] / 255.0);
    max_level = std::max(max_level, std::abs(a - b));
  }
  // Reference stores float32 intermediates.
  EXPECT_LT(max_err, 2e-3) << tc.file;
  EXPECT_LE(max_level, 1) << tc.file;
}

INSTANTIATE_TEST_SUITE_P(
    Cases, PillowFloatTest,
    ::testing::Values(
        OracleCase{"pillow_f_112_to_14.txt", "astronaut_face_112.png"},
        OracleCase{"pillow_f_112_to_37x23.txt", "astronaut_face_112.png"},
        OracleCase{"pillow_f_112_to_150x131.txt", "astronaut_face_112.png"},
        OracleCase{"pillow_f_14_to_112.txt", "pillow_bicubic_14.png"}));

TEST(ResizeTest, EightBitReferenceWithinOneLevel) {
  const ImageBuf face = ReadPng(kData + "/astronaut_face_112.png");
  const ImageBuf ref = ReadPng(kData + "/pillow_bicubic_14.png");
  const ImageBuf out = ResizeBicubic(face, 14, 14);
  ASSERT_EQ(out.width(), 14);
  for (size_t i = 0; i < ref.data().size(); ++i) {
    EXPECT_LE(std::abs(out.data()[i] - ref.data()[i]), 1) << i;
  }
}

TEST(GrayTest, Bt601) {
  ImageBuf img(2, 1, 3, {255, 0, 0, 10, 200, 30});
  const ImageBuf g = ToGray(img);
  ASSERT_EQ(g.channels(), 1);
  EXPECT_EQ(g.at(0, 0, 0), 76);  // 0.299 * 255 = 76.245
  EXPECT_EQ(g.at(1, 0, 0), 124);  // 2.99 + 117.4 + 3.42 = 123.81
}

TEST(PsnrTest, KnownValues) {
  ImageBuf a(4, 4, 1);
  ImageBuf b(4, 4, 1);
  EXPECT_TRUE(std::isinf(Psnr(a, b)));
  for (uint8_t& v : b.data()) v = 1;
  // MSE 1 -> 20 log10(255).
  EXPECT_NEAR(Psnr(a, b), 20 * std::log10(255.0), 1e-12);
}

TEST(PngTest, RoundTripRgbAndGray) {
  const ImageBuf rgb = RandomImage(13, 7, 3, 1);
  EXPECT_EQ(DecodePng(EncodePng(rgb)), rgb);
  const auto path = std::filesystem::temp_directory_path() / "dk_png_rt.png";
  WritePng(rgb, path);
  EXPECT_EQ(ReadPng(path), rgb);
  std::filesystem::remove(path);

  // Gray PNGs are expanded to RGB on read.
  const ImageBuf gray = RandomImage(5, 6, 1, 2);
  const ImageBuf back = DecodePng(EncodePng(gray));
  ASSERT_EQ(back.channels(), 3);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 5; ++x) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(back.at(x, y, c), gray.at(x, y, 0));
    }
  }
}

TEST(PngTest, ErrorsAreTyped) {
  const std::vector<uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(DecodePng(junk), DataError);
  EXPECT_THROW(ReadPng("/nonexistent/dir/x.png"), IoError);
}

}  // namespace
}  // namespace degradekit
