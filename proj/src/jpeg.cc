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

// Baseline JPEG lossy path (T.81 with JFIF color conventions). Only the
// transforms that lose information are modelled; Huffman coding would be
// bit-exact and is skipped.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "degradekit/degrade.h"
#include "degradekit/error.h"

namespace degradekit {

// clang-format off
const std::array<uint16_t, 64> kAnnexKLuma = {
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99};

const std::array<uint16_t, 64> kAnnexKChroma = {
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99};
// clang-format on

namespace {

// Integer sample plane, one component.
struct Plane {
  int w = 0;
  int h = 0;
  std::vector<int> v;

  Plane(int width, int height)
      : w(width), h(height), v(static_cast<size_t>(width) * height) {}
  int& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
  int at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
  // Edge-clamped read.
  int clamped(int x, int y) const {
    return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  }
};

int RoundToSample(double v) {
  return static_cast<int>(std::clamp(std::round(v), 0.0, 255.0));
}

std::array<uint16_t, 64> ScaleTable(const std::array<uint16_t, 64>& base,
                                    int scale) {
  std::array<uint16_t, 64> out{};
  for (size_t i = 0; i < 64; ++i) {
    long q = (static_cast<long>(base[i]) * scale + 50L) / 100L;
    out[i] = static_cast<uint16_t>(std::clamp(q, 1L, 255L));
  }
  return out;
}

// cos((2x + 1) u pi / 16) * C(u) / 2, with C(0) = 1/sqrt(2).
struct DctBasis {
  double m[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
      for (int x = 0; x < 8; ++x) {
        m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16);
      }
    }
  }
};

const DctBasis& Basis() {
  static const DctBasis basis;
  return basis;
}

// Quantize and reconstruct one 8x8 block in place (samples level-shifted).
void RoundTripBlock(double block[8][8], const std::array<uint16_t, 64>& q) {
  const auto& b = Basis().m;
  double tmp[8][8];
  double coef[8][8];
  // Forward: rows then columns.
  for (int y = 0; y < 8; ++y) {
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += b[u][x] * block[y][x];
      tmp[y][u] = acc;
    }
  }
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b[v][y] * tmp[y][u];
      const double step = q[v * 8 + u];
      coef[v][u] = std::round(acc / step) * step;
    }
  }
  // Inverse.
  for (int v = 0; v < 8; ++v) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b[u][x] * coef[v][u];
      tmp[v][x] = acc;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += b[v][y] * tmp[v][x];
      block[y][x] = acc;
    }
  }
}

void RoundTripPlane(Plane& p, const std::array<uint16_t, 64>& q) {
  double block[8][8];
  for (int by = 0; by < p.h; by += 8) {
    for (int bx = 0; bx < p.w; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) block[y][x] = p.at(bx + x, by + y) - 128.0;
      }
      RoundTripBlock(block, q);
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          p.at(bx + x, by + y) = RoundToSample(block[y][x] + 128.0);
        }
      }
    }
  }
}

// 2x2 box average with the alternating 1,2 rounding bias used by the IJG
// h2v2 downsampler.
Plane Downsample2x2(const Plane& p) {
  Plane out(p.w / 2, p.h / 2);
  for (int y = 0; y < out.h; ++y) {
    int bias = 1;
    for (int x = 0; x < out.w; ++x) {
      const int sum = p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) +
                      p.at(2 * x, 2 * y + 1) + p.at(2 * x + 1, 2 * y + 1);
      out.at(x, y) = (sum + bias) >> 2;
      bias ^= 3;
    }
  }
  return out;
}

// Triangle-filter ("fancy") 2x upsampling: each output sample weights the
// nearer input 3/4 and the farther 1/4 along both axes.
Plane Upsample2x2(const Plane& p) {
  Plane out(p.w * 2, p.h * 2);
  for (int y = 0; y < p.h; ++y) {
    for (int half = 0; half < 2; ++half) {
      const int ny = half == 0 ? y - 1 : y + 1;
      for (int x = 0; x < p.w; ++x) {
        const int here = 3 * p.clamped(x, y) + p.clamped(x, ny);
        const int left = 3 * p.clamped(x - 1, y) + p.clamped(x - 1, ny);
        const int right = 3 * p.clamped(x + 1, y) + p.clamped(x + 1, ny);
        out.at(2 * x, 2 * y + half) = (3 * here + left + 8) >> 4;
        out.at(2 * x + 1, 2 * y + half) = (3 * here + right + 7) >> 4;
      }
    }
  }
  return out;
}

}  // namespace

JpegQuantTables MakeJpegQuantTables(int quality) {
  if (quality < 1 || quality > 100) {
    throw InvalidArgument("JPEG quality must be in [1, 100], got " +
                          std::to_string(quality));
  }
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  return {ScaleTable(kAnnexKLuma, scale), ScaleTable(kAnnexKChroma, scale)};
}

ImageBuf JpegRecompress(const ImageBuf& img, int quality) {
  const JpegQuantTables tables = MakeJpegQuantTables(quality);
  if (img.channels() != 3) {
    throw InvalidArgument("JPEG recompression needs a 3-channel image");
  }
  const int w = img.width();
  const int h = img.height();
  // Pad to whole 16x16 MCUs by edge replication.
  const int pw = (w + 15) / 16 * 16;
  const int ph = (h + 15) / 16 * 16;

  Plane y_plane(pw, ph);
  Plane cb_full(pw, ph);
  Plane cr_full(pw, ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = std::min(y, h - 1);
    for (int x = 0; x < pw; ++x) {
      const int sx = std::min(x, w - 1);
      const double r = img.at(sx, sy, 0);
      const double g = img.at(sx, sy, 1);
      const double b = img.at(sx, sy, 2);
      y_plane.at(x, y) = RoundToSample(0.299 * r + 0.587 * g + 0.114 * b);
      cb_full.at(x, y) =
          RoundToSample(-0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0);
      cr_full.at(x, y) =
          RoundToSample(0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0);
    }
  }
  Plane cb = Downsample2x2(cb_full);
  Plane cr = Downsample2x2(cr_full);

  RoundTripPlane(y_plane, tables.luma);
  RoundTripPlane(cb, tables.chroma);
  RoundTripPlane(cr, tables.chroma);

  const Plane cb_up = Upsample2x2(cb);
  const Plane cr_up = Upsample2x2(cr);

  ImageBuf out(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double yy = y_plane.at(x, y);
      const double cbv = cb_up.at(x, y) - 128.0;
      const double crv = cr_up.at(x, y) - 128.0;
      out.at(x, y, 0) = static_cast<uint8_t>(RoundToSample(yy + 1.402 * crv));
      out.at(x, y, 1) = static_cast<uint8_t>(
          RoundToSample(yy - 0.344136286 * cbv - 0.714136286 * crv));
      out.at(x, y, 2) = static_cast<uint8_t>(RoundToSample(yy + 1.772 * cbv));
    }
  }
  return out;
}

}  // namespace degradekit
