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

// LFW-style verification: per-fold thresholds fitted once on clean scores,
// then frozen and applied to every degraded run.

#ifndef DEGRADEKIT_VERIFY_H_
#define DEGRADEKIT_VERIFY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "degradekit/embed.h"
#include "degradekit/sweep.h"
#include "json.hpp"

namespace degradekit {

struct Pair {
  std::string a;  // image ids, "Name/Name_0001"
  std::string b;
  bool same = false;
  int fold = 0;

  friend bool operator==(const Pair&, const Pair&) = default;
};

std::string LfwImageId(std::string_view name, int index);

struct PairSet {
  int num_folds = 0;
  std::vector<Pair> pairs;

  // pairs.txt layout: "<folds> <n>" then, per fold, n matched lines
  // "name i j" followed by n mismatched lines "name1 i name2 j".
  static PairSet ParseLfw(std::string_view text);
  static PairSet LoadLfw(const std::filesystem::path& path);
  std::string FormatLfw() const;

  // Every fold non-empty with the same number of pairs, half of them
  // positive. Throws DataError.
  void Validate() const;

  // Sorted, de-duplicated.
  std::vector<std::string> ImageIds() const;
  size_t FoldSize(int fold) const;
};

struct ThresholdFit {
  double threshold = 0.0;
  size_t correct = 0;
  size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

// Best threshold for "same iff score >= t" over the candidates
// {min - 1, midpoints of consecutive distinct sorted scores, max + 1}.
// Ties go to the smallest threshold. Throws InvalidArgument if empty.
ThresholdFit OptimizeThreshold(std::span<const double> scores,
                               std::span<const uint8_t> same);

struct ThresholdSet {
  std::vector<double> thresholds;      // per fold
  std::vector<double> train_accuracy;  // on the other folds

  friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

// Threshold for fold i fitted on pairs of all other folds.
ThresholdSet OptimizeThresholds(std::span<const double> clean_scores,
                                const PairSet& pairs);

enum class Mode { kNormal, kCross };
std::string_view ModeName(Mode mode);
Mode ModeFromName(std::string_view name);

// Which image of a pair is degraded in cross mode.
enum class CrossSide { kDegradeB, kDegradeA };

struct RunResult {
  size_t combination = 0;
  int repeat = 0;
  Mode mode = Mode::kNormal;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

// Per-fold fraction of pairs classified correctly with the fold's threshold.
std::vector<double> FoldAccuracies(std::span<const double> scores,
                                   const PairSet& pairs,
                                   const ThresholdSet& thresholds);
double MeanOf(std::span<const double> v);

std::vector<double> CleanScores(const EmbeddingStore& store,
                                const PairSet& pairs);

// Scores each pair from the store (no re-fitting) and reports accuracy.
// Throws MissingKeyError naming the first absent key.
RunResult Evaluate(const EmbeddingStore& store, const PairSet& pairs,
                   const ThresholdSet& thresholds, Mode mode,
                   size_t combination, int repeat,
                   CrossSide side = CrossSide::kDegradeB);

enum class SeriesKind { kSingle, kCombined, kWithoutExposure };
std::string_view SeriesName(SeriesKind kind);

struct SeriesPoint {
  Axis axis = Axis::kNoise;
  size_t value_index = 0;
  std::string value;
  Mode mode = Mode::kNormal;
  SeriesKind kind = SeriesKind::kSingle;
  double mean_accuracy = 0.0;
  size_t n_combos = 0;
};

struct CombinationSummary {
  size_t index = 0;
  int extreme_count = 0;
  double normal = 0.0;  // repeat-averaged mean accuracy
  double cross = 0.0;
};

struct BenchmarkReport {
  std::vector<RunResult> runs;  // manifest order, repeat, then mode
  std::vector<CombinationSummary> combinations;
  std::vector<SeriesPoint> series;
};

// Averages repeats per combination, then builds for each axis value and mode
//   single:   that value alone, every other axis None;
//   combined: mean over combinations with <= 1 extreme holding that value;
//   w/oExposure: combined restricted to exposure None (not built for the
//                exposure axis itself).
// Throws DataError listing every manifest entry without a complete set of
// results.
BenchmarkReport Aggregate(std::span<const RunResult> results,
                          const SweepManifest& manifest);

nlohmann::json RunResultToJson(const RunResult& r);
RunResult RunResultFromJson(const nlohmann::json& j);
nlohmann::json SeriesToJson(std::span<const SeriesPoint> series);
// Header "axis,value,mode,series,mean_accuracy,n_combos", one row per point.
std::string SeriesToCsv(std::span<const SeriesPoint> series);

// Shortest round-trip decimal form.
std::string FormatDouble(double v);

}  // namespace degradekit

#endif  // DEGRADEKIT_VERIFY_H_
