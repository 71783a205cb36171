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

#include "degradekit/degrade.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "degradekit/error.h"
#include "degradekit/rng.h"

namespace degradekit {
namespace {

constexpr double kPi = std::numbers::pi;

int Reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

bool ParseDouble(std::string_view s, double* out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void KernelParams::Validate() const {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !std::isfinite(sigma_x) ||
      !std::isfinite(sigma_y)) {
    throw InvalidArgument("kernel sigmas must be positive and finite");
  }
  if (!(theta >= 0.0 && theta < kPi)) {
    throw InvalidArgument("kernel rotation must lie in [0, pi), got " +
                          FormatTheta(theta));
  }
}

double ParseTheta(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '*') s.push_back(c);
  }
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string::npos) {
    double v = 0.0;
    if (!ParseDouble(s, &v)) {
      throw InvalidArgument("cannot parse rotation '" + std::string(text) + "'");
    }
    return v;
  }
  double num = 1.0;
  double den = 1.0;
  const std::string head = s.substr(0, pi_pos);
  std::string tail = s.substr(pi_pos + 2);
  if (!head.empty() && !ParseDouble(head, &num)) {
    throw InvalidArgument("cannot parse rotation '" + std::string(text) + "'");
  }
  if (!tail.empty()) {
    if (tail[0] != '/' || !ParseDouble(tail.substr(1), &den) || den == 0.0) {
      throw InvalidArgument("cannot parse rotation '" + std::string(text) +
                            "'");
    }
  }
  return num * kPi / den;
}

std::string FormatTheta(double theta) {
  if (theta == 0.0) return "0";
  for (int den : {1, 2, 3, 4, 6, 12}) {
    const double k = std::round(theta * den / kPi);
    if (k >= 1.0 && k * kPi / den == theta) {
      std::string out = k == 1.0 ? "" : std::to_string(static_cast<int>(k));
      out += "pi";
      if (den != 1) out += "/" + std::to_string(den);
      return out;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", theta);
  return buf;
}

void DegradationParams::Validate() const {
  if (exposure_gamma && !(*exposure_gamma > 0.0 && std::isfinite(*exposure_gamma))) {
    throw InvalidArgument("exposure gamma must be positive");
  }
  if (kernel) kernel->Validate();
  if (downscale_ratio && *downscale_ratio < 2) {
    throw InvalidArgument("downscale ratio must be an integer >= 2");
  }
  if (noise_sigma && !(*noise_sigma > 0.0 && std::isfinite(*noise_sigma))) {
    throw InvalidArgument("noise sigma must be positive");
  }
  if (jpeg_quality && (*jpeg_quality < 1 || *jpeg_quality > 100)) {
    throw InvalidArgument("JPEG quality must be in [1, 100]");
  }
}

Kernel2D Kernel2D::Transposed() const {
  Kernel2D t{size, std::vector<double>(w.size())};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) t.w[x * size + y] = w[y * size + x];
  }
  return t;
}

Kernel2D MakeGaussianKernel(const KernelParams& p, int size) {
  p.Validate();
  if (size < 3 || size % 2 == 0) {
    throw InvalidArgument("kernel size must be odd and >= 3, got " +
                          std::to_string(size));
  }
  // Inverse covariance of R diag(sx^2, sy^2) R^T is R diag(1/sx^2, 1/sy^2) R^T.
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const double ix = 1.0 / (p.sigma_x * p.sigma_x);
  const double iy = 1.0 / (p.sigma_y * p.sigma_y);
  const double a = c * c * ix + s * s * iy;
  const double b = c * s * (ix - iy);
  const double d = s * s * ix + c * c * iy;

  Kernel2D k{size, std::vector<double>(static_cast<size_t>(size) * size)};
  const int half = size / 2;
  double sum = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double vx = x - half;
      const double vy = y - half;
      const double q = a * vx * vx + 2.0 * b * vx * vy + d * vy * vy;
      const double w = std::exp(-0.5 * q);
      k.w[y * size + x] = w;
      sum += w;
    }
  }
  for (double& w : k.w) w /= sum;
  return k;
}

double ExposeSample(double s, double gamma) {
  if (gamma == 1.0) return s;
  return 1.0 - std::pow(1.0 - s, gamma);
}

FloatPlane ApplyExposure(const FloatPlane& plane, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("exposure gamma must be positive");
  FloatPlane out = plane;
  for (double& v : out.data()) {
    v = ExposeSample(std::clamp(v, 0.0, 1.0), gamma);
  }
  return out;
}

FloatPlane Convolve(const FloatPlane& plane, const Kernel2D& kernel) {
  const int k = kernel.size;
  if (k < 1 || k % 2 == 0 ||
      kernel.w.size() != static_cast<size_t>(k) * k) {
    throw InvalidArgument("kernel must be square with odd size");
  }
  const int w = plane.width();
  const int h = plane.height();
  if (k > w || k > h) {
    throw InvalidArgument("kernel " + std::to_string(k) +
                          " larger than image " + std::to_string(w) + "x" +
                          std::to_string(h));
  }
  const int half = k / 2;
  const int ch = plane.channels();
  // Reflect-101 padded copy, so the inner loops are branch-free.
  const int pw = w + 2 * half;
  const int ph = h + 2 * half;
  std::vector<double> padded(static_cast<size_t>(pw) * ph * ch);
  for (int y = 0; y < ph; ++y) {
    const int sy = Reflect101(y - half, h);
    for (int x = 0; x < pw; ++x) {
      const int sx = Reflect101(x - half, w);
      for (int c = 0; c < ch; ++c) {
        padded[(static_cast<size_t>(y) * pw + x) * ch + c] = plane.at(sx, sy, c);
      }
    }
  }
  FloatPlane out(w, h, ch);
  auto dst = out.data();
  const size_t row_stride = static_cast<size_t>(w) * ch;
  for (int y = 0; y < h; ++y) {
    double* out_row = dst.data() + y * row_stride;
    for (int j = 0; j < k; ++j) {
      const double* src_row =
          padded.data() + static_cast<size_t>(y + j) * pw * ch;
      const double* krow = kernel.w.data() + static_cast<size_t>(j) * k;
      for (int i = 0; i < k; ++i) {
        const double wt = krow[i];
        const double* src = src_row + static_cast<size_t>(i) * ch;
        for (size_t t = 0; t < row_stride; ++t) out_row[t] += wt * src[t];
      }
    }
  }
  return out;
}

FloatPlane AddNoise(const FloatPlane& plane, double sigma255, uint64_t seed) {
  if (!(sigma255 > 0.0)) throw InvalidArgument("noise sigma must be positive");
  const double sigma = sigma255 / 255.0;
  CounterRng rng(seed);
  FloatPlane out = plane;
  for (double& v : out.data()) {
    v = std::clamp(v + sigma * rng.NextNormal(), 0.0, 1.0);
  }
  return out;
}

ImageBuf Degrade(const ImageBuf& img, const DegradationParams& params,
                 uint64_t seed, int out_size) {
  params.Validate();
  if (out_size < 1) throw InvalidArgument("output size must be positive");

  FloatPlane plane = ToFloat(img);
  if (params.exposure_gamma) {
    plane = ApplyExposure(plane, *params.exposure_gamma);
  }
  if (params.kernel) {
    plane = Convolve(plane, MakeGaussianKernel(*params.kernel));
  }
  if (params.downscale_ratio) {
    const int r = *params.downscale_ratio;
    const int w = plane.width() / r;
    const int h = plane.height() / r;
    if (w < 1 || h < 1) {
      throw InvalidArgument("downscale by " + std::to_string(r) +
                            " leaves an empty image");
    }
    plane = ResizeBicubic(plane, w, h);
  }
  if (params.noise_sigma) {
    plane = AddNoise(plane, *params.noise_sigma, seed);
  }
  ImageBuf out = Quantize(plane);
  if (params.jpeg_quality) {
    out = JpegRecompress(out, *params.jpeg_quality);
  }
  return ResizeBicubic(out, out_size, out_size);
}

}  // namespace degradekit
