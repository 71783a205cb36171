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

#ifndef DEGRADEKIT_IMAGE_H_
#define DEGRADEKIT_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace degradekit {

// Owned 8-bit raster, row-major with interleaved channels (1 or 3).
class ImageBuf {
 public:
  ImageBuf() = default;
  // Zero-filled image. Throws InvalidArgument on bad dimensions.
  ImageBuf(int width, int height, int channels);
  ImageBuf(int width, int height, int channels, std::vector<uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<uint8_t> data() { return data_; }
  std::span<const uint8_t> data() const { return data_; }

  friend bool operator==(const ImageBuf&, const ImageBuf&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<uint8_t> data_;
};

// Floating-point working image; same layout as ImageBuf. Samples are
// nominally in [0, 1] but intermediate stages may leave that range.
class FloatPlane {
 public:
  FloatPlane() = default;
  FloatPlane(int width, int height, int channels);
  FloatPlane(int width, int height, int channels, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double& at(int x, int y, int c) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

FloatPlane ToFloat(const ImageBuf& img);

// Clamps to [0,1], scales by 255 and rounds half away from zero.
ImageBuf Quantize(const FloatPlane& plane);

uint8_t QuantizeSample(double v);

// Separable bicubic resampling with the Keys kernel (a = -0.5). When an axis
// is reduced the kernel support is stretched by the scale factor, so
// downscaling is anti-aliased. The tap window is clamped to the image bounds
// and the remaining weights renormalized.
FloatPlane ResizeBicubic(const FloatPlane& plane, int out_w, int out_h);

// Convenience wrapper: float conversion, resize, quantize.
ImageBuf ResizeBicubic(const ImageBuf& img, int out_w, int out_h);

// ITU-R BT.601 luma, one channel out.
ImageBuf ToGray(const ImageBuf& img);

// PNG I/O. Reading converts palette/gray/alpha/16-bit inputs to 8-bit RGB.
ImageBuf ReadPng(const std::filesystem::path& path);
ImageBuf DecodePng(std::span<const uint8_t> bytes);
void WritePng(const ImageBuf& img, const std::filesystem::path& path);
std::vector<uint8_t> EncodePng(const ImageBuf& img);

double Psnr(const ImageBuf& a, const ImageBuf& b);

}  // namespace degradekit

#endif  // DEGRADEKIT_IMAGE_H_
