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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "degradekit/error.h"
#include "degradekit/image.h"

namespace degradekit {
namespace {

constexpr double kCubicA = -0.5;
constexpr double kCubicSupport = 2.0;

double Cubic(double x) {
  x = std::fabs(x);
  if (x < 1.0) return ((kCubicA + 2.0) * x - (kCubicA + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * kCubicA;
  return 0.0;
}

// Taps for one output sample: the kernel window clamped to the image,
// weights normalized to sum 1 over the taps that remain.
struct Contrib {
  int first = 0;
  std::vector<double> weight;
};

std::vector<Contrib> ComputeContribs(int in_size, int out_size) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double filter_scale = std::max(scale, 1.0);
  const double support = kCubicSupport * filter_scale;
  std::vector<Contrib> out(out_size);
  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) * scale;
    const int lo = std::max(static_cast<int>(center - support + 0.5), 0);
    const int hi = std::min(static_cast<int>(center + support + 0.5), in_size);
    Contrib& c = out[i];
    c.first = lo;
    double sum = 0.0;
    for (int x = lo; x < hi; ++x) {
      const double w = Cubic((x + 0.5 - center) / filter_scale);
      c.weight.push_back(w);
      sum += w;
    }
    if (sum != 0.0) {
      for (double& w : c.weight) w /= sum;
    }
  }
  return out;
}

}  // namespace

FloatPlane ResizeBicubic(const FloatPlane& plane, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw InvalidArgument("resize target must be at least 1x1, got " +
                          std::to_string(out_w) + "x" + std::to_string(out_h));
  }
  const int in_w = plane.width();
  const int in_h = plane.height();
  const int ch = plane.channels();
  if (in_w == out_w && in_h == out_h) return plane;

  // Horizontal pass into an out_w x in_h buffer, then vertical.
  const auto hc = ComputeContribs(in_w, out_w);
  FloatPlane tmp(out_w, in_h, ch);
  for (int y = 0; y < in_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Contrib& c = hc[x];
      for (int k = 0; k < ch; ++k) {
        double acc = 0.0;
        for (size_t t = 0; t < c.weight.size(); ++t) {
          acc += c.weight[t] * plane.at(c.first + static_cast<int>(t), y, k);
        }
        tmp.at(x, y, k) = acc;
      }
    }
  }

  const auto vc = ComputeContribs(in_h, out_h);
  FloatPlane out(out_w, out_h, ch);
  for (int y = 0; y < out_h; ++y) {
    const Contrib& c = vc[y];
    for (int x = 0; x < out_w; ++x) {
      for (int k = 0; k < ch; ++k) {
        double acc = 0.0;
        for (size_t t = 0; t < c.weight.size(); ++t) {
          acc += c.weight[t] * tmp.at(x, c.first + static_cast<int>(t), k);
        }
        out.at(x, y, k) = acc;
      }
    }
  }
  return out;
}

ImageBuf ResizeBicubic(const ImageBuf& img, int out_w, int out_h) {
  if (img.width() == out_w && img.height() == out_h) return img;
  return Quantize(ResizeBicubic(ToFloat(img), out_w, out_h));
}

}  // namespace degradekit
