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

#ifndef DEGRADEKIT_SWEEP_H_
#define DEGRADEKIT_SWEEP_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "degradekit/degrade.h"
#include "json.hpp"

namespace degradekit {

// Grid axes in enumeration order; noise varies slowest, exposure fastest.
enum class Axis { kNoise = 0, kJpeg, kDownscale, kKernel, kExposure };

inline constexpr std::array<Axis, 5> kAllAxes = {
    Axis::kNoise, Axis::kJpeg, Axis::kDownscale, Axis::kKernel,
    Axis::kExposure};
inline constexpr size_t kNumAxes = kAllAxes.size();

std::string_view AxisName(Axis axis);
Axis AxisFromName(std::string_view name);

// One value on an axis. An empty `value` means the stage is skipped.
template <typename T>
struct AxisEntry {
  std::optional<T> value;
  bool extreme = false;

  friend bool operator==(const AxisEntry&, const AxisEntry&) = default;
};

// Position of a combination along each axis.
using AxisIndices = std::array<size_t, kNumAxes>;

struct ParamGrid {
  std::vector<AxisEntry<double>> noise_sigmas;
  std::vector<AxisEntry<int>> jpeg_qualities;
  std::vector<AxisEntry<int>> downscale_ratios;
  std::vector<AxisEntry<KernelParams>> kernels;
  std::vector<AxisEntry<double>> exposure_gammas;

  // The study grid, extremes flagged.
  static ParamGrid StudyGrid();

  // Non-empty axes, no duplicate values, valid parameters, None never
  // extreme. Throws InvalidArgument.
  void Validate() const;

  size_t AxisSize(Axis axis) const;
  size_t CombinationCount() const;

  AxisIndices Decompose(size_t index) const;
  size_t Compose(const AxisIndices& at) const;
  DegradationParams ParamsAt(const AxisIndices& at) const;
  DegradationParams ParamsAt(size_t index) const { return ParamsAt(Decompose(index)); }

  // Throws InvalidArgument if any field is not on its axis.
  AxisIndices Locate(const DegradationParams& p) const;
  size_t IndexOf(const DegradationParams& p) const { return Compose(Locate(p)); }

  bool IsNone(Axis axis, size_t value_index) const;
  bool IsExtreme(Axis axis, size_t value_index) const;
  // "None", "64", "(1,3,pi/4)".
  std::string ValueLabel(Axis axis, size_t value_index) const;

  friend bool operator==(const ParamGrid&, const ParamGrid&) = default;
};

std::vector<DegradationParams> EnumerateCombinations(const ParamGrid& grid);

int ExtremeCount(const DegradationParams& p, const ParamGrid& grid);
int ExtremeCount(const AxisIndices& at, const ParamGrid& grid);

// Keeps combinations with at most one extreme axis value, preserving order.
std::vector<DegradationParams> FilterAtMostOneExtreme(
    const std::vector<DegradationParams>& combos, const ParamGrid& grid);

inline constexpr int kNoiseRepeats = 5;
inline constexpr int kManifestVersion = 1;

struct ManifestEntry {
  size_t index = 0;
  DegradationParams params;
  int extreme_count = 0;
  int repeats = 1;
  std::vector<uint64_t> seeds;  // one per repeat

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct SweepManifest {
  int version = kManifestVersion;
  ParamGrid grid;
  uint64_t global_seed = 0;
  std::string seed_scheme;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const SweepManifest&, const SweepManifest&) = default;
};

// All combinations in index order; noisy combinations repeat kNoiseRepeats
// times, each repeat with its own derived seed.
SweepManifest PlanRuns(const ParamGrid& grid, uint64_t global_seed);

size_t TotalRuns(const SweepManifest& manifest);

// JSON forms. Parsers reject unknown fields.
nlohmann::json KernelToJson(const KernelParams& k);
KernelParams KernelFromJson(const nlohmann::json& j);
nlohmann::json ParamsToJson(const DegradationParams& p);
DegradationParams ParamsFromJson(const nlohmann::json& j);
nlohmann::json GridToJson(const ParamGrid& grid);
ParamGrid GridFromJson(const nlohmann::json& j);

std::string SerializeManifest(const SweepManifest& manifest);
SweepManifest ParseManifest(std::string_view text);

// Hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string ManifestHash(const SweepManifest& manifest);

// Throws DataError listing the offending keys if `j` has keys outside
// `allowed`.
void RejectUnknownFields(const nlohmann::json& j,
                         std::initializer_list<std::string_view> allowed,
                         std::string_view what);

}  // namespace degradekit

#endif  // DEGRADEKIT_SWEEP_H_
