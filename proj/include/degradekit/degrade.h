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

// Degradation operators and the full pipeline:
//
//   exposure -> blur -> bicubic downscale -> additive noise -> quantize
//     -> JPEG recompress -> bicubic resize to the output size
//
// Every stage is optional; an absent stage is skipped.

#ifndef DEGRADEKIT_DEGRADE_H_
#define DEGRADEKIT_DEGRADE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "degradekit/image.h"

namespace degradekit {

// Anisotropic Gaussian blur parameters. theta is in radians, in [0, pi).
struct KernelParams {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double theta = 0.0;

  void Validate() const;
  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

// Parses a rotation such as "0", "pi/4", "3pi/4", "3*pi/4" or "0.7854".
// Multiples of pi are evaluated as k * pi / d so they are exact to the last
// bit and compare equal across parse sites.
double ParseTheta(std::string_view text);
// Inverse of ParseTheta for multiples of pi/12; plain decimal otherwise.
std::string FormatTheta(double theta);

struct DegradationParams {
  std::optional<double> exposure_gamma;
  std::optional<KernelParams> kernel;
  std::optional<int> downscale_ratio;
  // Standard deviation on the 0-255 scale.
  std::optional<double> noise_sigma;
  std::optional<int> jpeg_quality;

  void Validate() const;
  bool IsIdentity() const {
    return !exposure_gamma && !kernel && !downscale_ratio && !noise_sigma &&
           !jpeg_quality;
  }
  friend bool operator==(const DegradationParams&,
                         const DegradationParams&) = default;
};

// Square weight grid, row-major, weight(x, y) = w[y * size + x].
struct Kernel2D {
  int size = 1;
  std::vector<double> w{1.0};

  double at(int x, int y) const { return w[y * size + x]; }
  Kernel2D Transposed() const;
};

inline constexpr int kBlurKernelSize = 11;
inline constexpr int kDefaultOutputSize = 112;

// w(v) ~ exp(-0.5 v^T S^-1 v), S = R(theta) diag(sx^2, sy^2) R(theta)^T,
// v = (x - c, y - c) with x along columns. Normalized to sum 1.
Kernel2D MakeGaussianKernel(const KernelParams& p, int size = kBlurKernelSize);

// s -> 1 - (1 - s)^gamma. gamma < 1 darkens, gamma > 1 brightens.
FloatPlane ApplyExposure(const FloatPlane& plane, double gamma);
double ExposeSample(double s, double gamma);

// Per-channel 2-D correlation with reflect-101 borders.
FloatPlane Convolve(const FloatPlane& plane, const Kernel2D& kernel);

// Adds i.i.d. N(0, (sigma255/255)^2) to every sample and clamps to [0, 1].
FloatPlane AddNoise(const FloatPlane& plane, double sigma255, uint64_t seed);

// Luma and chroma quantization tables in natural (row-major) order.
struct JpegQuantTables {
  std::array<uint16_t, 64> luma;
  std::array<uint16_t, 64> chroma;
};

// ITU-T T.81 Annex K tables (K.1 and K.2), natural order.
extern const std::array<uint16_t, 64> kAnnexKLuma;
extern const std::array<uint16_t, 64> kAnnexKChroma;

// Annex K tables scaled with the IJG quality rule.
JpegQuantTables MakeJpegQuantTables(int quality);

// Lossy round trip through baseline JPEG: YCbCr, 4:2:0, 8x8 DCT,
// quantize/dequantize, inverse DCT, fancy chroma upsampling, RGB.
// Entropy coding is lossless and skipped.
ImageBuf JpegRecompress(const ImageBuf& img, int quality);

// The full pipeline. Deterministic in (img, params, seed, out_size).
ImageBuf Degrade(const ImageBuf& img, const DegradationParams& params,
                 uint64_t seed, int out_size = kDefaultOutputSize);

}  // namespace degradekit

#endif  // DEGRADEKIT_DEGRADE_H_
