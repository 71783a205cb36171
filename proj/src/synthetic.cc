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

#include "degradekit/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <utility>

#include "degradekit/error.h"
#include "degradekit/rng.h"

namespace degradekit {
namespace {

double Uniform(CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * (rng.NextOpenUnit());
}

size_t UniformIndex(CounterRng& rng, size_t n) {
  return static_cast<size_t>(rng.NextU64() % n);
}

template <typename T>
void Shuffle(std::vector<T>& v, CounterRng& rng) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[UniformIndex(rng, i)]);
}

}  // namespace

std::string SyntheticName(int identity) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Person_%03d", identity);
  return buf;
}

ImageBuf MakeSyntheticFace(const SyntheticOptions& opts, int identity, int image) {
  const int n = opts.image_size;
  CounterRng id_rng(DeriveRunSeed(opts.seed, static_cast<uint64_t>(identity), 0));
  struct Blob {
    double cx, cy, s, rgb[3];
  };
  double base[3];
  for (double& b : base) b = Uniform(id_rng, 70, 170);
  Blob blobs[6];
  for (Blob& b : blobs) {
    b.cx = Uniform(id_rng, 0.15, 0.85);
    b.cy = Uniform(id_rng, 0.15, 0.85);
    b.s = Uniform(id_rng, 0.06, 0.2);
    for (double& c : b.rgb) c = Uniform(id_rng, -70, 70);
  }
  const double fx = Uniform(id_rng, 1.0, 3.0);
  const double fy = Uniform(id_rng, 1.0, 3.0);
  const double phase = Uniform(id_rng, 0.0, 2 * std::numbers::pi);

  CounterRng img_rng(DeriveRunSeed(opts.seed, static_cast<uint64_t>(identity),
                                   static_cast<uint64_t>(image)));
  const double dx = Uniform(img_rng, -0.03, 0.03);
  const double dy = Uniform(img_rng, -0.03, 0.03);
  const double gain = Uniform(img_rng, 0.93, 1.07);

  ImageBuf out(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = (x + 0.5) / n + dx;
      const double v = (y + 0.5) / n + dy;
      const double wave =
          18.0 * std::sin(2 * std::numbers::pi * (fx * u + fy * v) + phase);
      for (int c = 0; c < 3; ++c) {
        double val = base[c] + wave;
        for (const Blob& b : blobs) {
          const double r2 = ((u - b.cx) * (u - b.cx) + (v - b.cy) * (v - b.cy)) /
                            (b.s * b.s);
          val += b.rgb[c] * std::exp(-0.5 * r2);
        }
        val = val * gain + 3.0 * img_rng.NextNormal();
        out.at(x, y, c) =
            static_cast<uint8_t>(std::clamp(std::round(val), 0.0, 255.0));
      }
    }
  }
  return out;
}

PairSet MakeSyntheticPairs(const SyntheticOptions& opts) {
  if (opts.identities < 2 * opts.folds || opts.images_per_identity < 2 ||
      opts.pairs_per_fold < 1) {
    throw InvalidArgument("too few synthetic identities for the requested folds");
  }
  CounterRng rng(Mix64(opts.seed ^ 0x70616972ULL));
  PairSet set;
  set.num_folds = opts.folds;
  const int m = opts.images_per_identity;
  for (int f = 0; f < opts.folds; ++f) {
    std::vector<int> ids;
    for (int i = f; i < opts.identities; i += opts.folds) ids.push_back(i);

    std::vector<Pair> matched;
    for (int id : ids) {
      for (int a = 1; a <= m; ++a) {
        for (int b = a + 1; b <= m; ++b) {
          const std::string name = SyntheticName(id);
          matched.push_back({LfwImageId(name, a), LfwImageId(name, b), true, f});
        }
      }
    }
    if (matched.size() < static_cast<size_t>(opts.pairs_per_fold)) {
      throw InvalidArgument("not enough matched pairs per fold: have " +
                            std::to_string(matched.size()));
    }
    Shuffle(matched, rng);
    matched.resize(opts.pairs_per_fold);
    set.pairs.insert(set.pairs.end(), matched.begin(), matched.end());

    std::set<std::pair<std::string, std::string>> seen;
    int made = 0;
    while (made < opts.pairs_per_fold) {
      const int i1 = ids[UniformIndex(rng, ids.size())];
      const int i2 = ids[UniformIndex(rng, ids.size())];
      if (i1 == i2) continue;
      Pair p{LfwImageId(SyntheticName(i1), 1 + static_cast<int>(UniformIndex(rng, m))),
             LfwImageId(SyntheticName(i2), 1 + static_cast<int>(UniformIndex(rng, m))),
             false, f};
      if (!seen.insert({p.a, p.b}).second) continue;
      set.pairs.push_back(std::move(p));
      ++made;
    }
  }
  set.Validate();
  return set;
}

void WriteSyntheticDataset(const SyntheticOptions& opts,
                           const std::filesystem::path& dir) {
  const PairSet pairs = MakeSyntheticPairs(opts);
  std::filesystem::create_directories(dir / "images");
  {
    std::ofstream out(dir / "pairs.txt");
    if (!out) throw IoError("cannot write " + (dir / "pairs.txt").string());
    out << pairs.FormatLfw();
  }
  for (const std::string& id : pairs.ImageIds()) {
    const auto slash = id.find('/');
    const std::string name = id.substr(0, slash);
    const int identity = std::stoi(name.substr(name.rfind('_') + 1));
    const int index = std::stoi(id.substr(id.rfind('_') + 1));
    std::filesystem::create_directories(dir / "images" / name);
    WritePng(MakeSyntheticFace(opts, identity, index),
             dir / "images" / (id + ".png"));
  }
}

ParamGrid MiniatureGrid() {
  ParamGrid g;
  g.noise_sigmas = {{}, {16.0}};
  g.jpeg_qualities = {{}, {4, true}};
  g.downscale_ratios = {{}, {8, true}};
  g.kernels = {{}, {KernelParams{1, 3, std::numbers::pi / 4}}};
  g.exposure_gammas = {{}, {8.0, true}};
  return g;
}

}  // namespace degradekit
