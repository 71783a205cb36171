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

#include "degradekit/image.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "degradekit/error.h"

namespace degradekit {
namespace {

constexpr int kMaxDim = 16384;

void CheckShape(int width, int height, int channels) {
  if (width < 1 || height < 1 || width > kMaxDim || height > kMaxDim) {
    throw InvalidArgument("image dimensions out of range: " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("unsupported channel count " +
                          std::to_string(channels));
  }
}

size_t SampleCount(int width, int height, int channels) {
  return static_cast<size_t>(width) * height * channels;
}

}  // namespace

ImageBuf::ImageBuf(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  CheckShape(width, height, channels);
  data_.assign(SampleCount(width, height, channels), 0);
}

ImageBuf::ImageBuf(int width, int height, int channels,
                   std::vector<uint8_t> data)
    : width_(width),
      height_(height),
      channels_(channels),
      data_(std::move(data)) {
  CheckShape(width, height, channels);
  if (data_.size() != SampleCount(width, height, channels)) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match shape");
  }
}

FloatPlane::FloatPlane(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  CheckShape(width, height, channels);
  data_.assign(SampleCount(width, height, channels), 0.0);
}

FloatPlane::FloatPlane(int width, int height, int channels,
                       std::vector<double> data)
    : width_(width),
      height_(height),
      channels_(channels),
      data_(std::move(data)) {
  CheckShape(width, height, channels);
  if (data_.size() != SampleCount(width, height, channels)) {
    throw InvalidArgument("plane data length " + std::to_string(data_.size()) +
                          " does not match shape");
  }
}

FloatPlane ToFloat(const ImageBuf& img) {
  FloatPlane out(img.width(), img.height(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
  return out;
}

uint8_t QuantizeSample(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 1.0) return 255;
  // std::round is half away from zero.
  return static_cast<uint8_t>(std::round(v * 255.0));
}

ImageBuf Quantize(const FloatPlane& plane) {
  ImageBuf out(plane.width(), plane.height(), plane.channels());
  auto src = plane.data();
  auto dst = out.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i] = QuantizeSample(src[i]);
  return out;
}

ImageBuf ToGray(const ImageBuf& img) {
  if (img.channels() == 1) return img;
  ImageBuf out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double v = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                       0.114 * img.at(x, y, 2);
      out.at(x, y, 0) = static_cast<uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
  }
  return out;
}

double Psnr(const ImageBuf& a, const ImageBuf& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.channels() != b.channels()) {
    throw InvalidArgument("PSNR of images with different shapes");
  }
  auto da = a.data();
  auto db = b.data();
  double sse = 0.0;
  for (size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(da.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace degradekit
