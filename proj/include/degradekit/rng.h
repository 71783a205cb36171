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

#ifndef DEGRADEKIT_RNG_H_
#define DEGRADEKIT_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace degradekit {

// SplitMix64 finalizer.
constexpr uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Name of the derivation below, written into manifests.
inline constexpr const char* kSeedScheme =
    "splitmix64-chain-v1: s=mix64(global^0x9e3779b97f4a7c15); "
    "s=mix64(s^mix64(combination+1)); s=mix64(s^mix64(repeat+1)); "
    "image seed=mix64(s^mix64(image+1)); normals via Box-Muller over "
    "splitmix64 stream";

// Seed for one (combination, repeat) cell of a sweep.
constexpr uint64_t DeriveRunSeed(uint64_t global_seed, uint64_t combination,
                                 uint64_t repeat) {
  uint64_t s = Mix64(global_seed ^ kGoldenGamma);
  s = Mix64(s ^ Mix64(combination + 1));
  return Mix64(s ^ Mix64(repeat + 1));
}

// Seed for one image inside a run, so images can be degraded independently.
constexpr uint64_t DeriveImageSeed(uint64_t run_seed, uint64_t image_index) {
  return Mix64(run_seed ^ Mix64(image_index + 1));
}

// Counter-based stream: value n is mix64(key + (n + 1) * golden), i.e. the
// SplitMix64 sequence started at `key`. Stateless apart from the counter, so
// any position is reproducible in isolation.
class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : key_(key) {}

  uint64_t NextU64() { return Mix64(key_ + (++counter_) * kGoldenGamma); }

  // Uniform in (0, 1].
  double NextOpenUnit() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double NextNormal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = NextOpenUnit();
    const double u2 = NextOpenUnit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace degradekit

#endif  // DEGRADEKIT_RNG_H_
