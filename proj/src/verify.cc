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

#include "degradekit/verify.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "degradekit/error.h"

namespace degradekit {

using nlohmann::json;

std::string LfwImageId(std::string_view name, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%04d", index);
  return std::string(name) + "/" + std::string(name) + buf;
}

namespace {

// Splits "Name_With_Underscores_0007" back into ("Name_With_Underscores", 7).
std::pair<std::string, int> SplitImageId(const std::string& id) {
  const auto slash = id.find('/');
  const auto us = id.rfind('_');
  if (slash == std::string::npos || us == std::string::npos || us < slash) {
    throw InvalidArgument("not an LFW image id: '" + id + "'");
  }
  return {id.substr(0, slash), std::stoi(id.substr(us + 1))};
}

}  // namespace

PairSet PairSet::ParseLfw(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  auto next_line = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::vector<std::string> tok;
      for (std::string t; ls >> t;) tok.push_back(t);
      if (!tok.empty()) return tok;
    }
    throw DataError("pairs file ended early after line " +
                    std::to_string(line_no));
  };
  auto to_int = [&](const std::string& s) {
    try {
      size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw DataError("pairs file line " + std::to_string(line_no) +
                      ": expected an integer, got '" + s + "'");
    }
  };

  PairSet set;
  auto header = next_line();
  if (header.size() != 2) {
    throw DataError("pairs file header must be '<folds> <pairs per fold>'");
  }
  set.num_folds = to_int(header[0]);
  const int per_class = to_int(header[1]);
  if (set.num_folds < 1 || per_class < 1) {
    throw DataError("pairs file header has non-positive counts");
  }
  for (int f = 0; f < set.num_folds; ++f) {
    for (int i = 0; i < per_class; ++i) {
      auto t = next_line();
      if (t.size() != 3) {
        throw DataError("pairs file line " + std::to_string(line_no) +
                        ": expected matched pair 'name idx1 idx2'");
      }
      set.pairs.push_back({LfwImageId(t[0], to_int(t[1])),
                           LfwImageId(t[0], to_int(t[2])), true, f});
    }
    for (int i = 0; i < per_class; ++i) {
      auto t = next_line();
      if (t.size() != 4) {
        throw DataError("pairs file line " + std::to_string(line_no) +
                        ": expected mismatched pair 'name1 idx1 name2 idx2'");
      }
      set.pairs.push_back({LfwImageId(t[0], to_int(t[1])),
                           LfwImageId(t[2], to_int(t[3])), false, f});
    }
  }
  set.Validate();
  return set;
}

PairSet PairSet::LoadLfw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseLfw(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string PairSet::FormatLfw() const {
  Validate();
  const size_t per_class = FoldSize(0) / 2;
  std::ostringstream out;
  out << num_folds << '\t' << per_class << '\n';
  for (int f = 0; f < num_folds; ++f) {
    for (bool same : {true, false}) {
      for (const Pair& p : pairs) {
        if (p.fold != f || p.same != same) continue;
        const auto [na, ia] = SplitImageId(p.a);
        const auto [nb, ib] = SplitImageId(p.b);
        if (same) {
          out << na << '\t' << ia << '\t' << ib << '\n';
        } else {
          out << na << '\t' << ia << '\t' << nb << '\t' << ib << '\n';
        }
      }
    }
  }
  return out.str();
}

void PairSet::Validate() const {
  if (num_folds < 1) throw DataError("pair set has no folds");
  std::vector<size_t> total(num_folds, 0);
  std::vector<size_t> positive(num_folds, 0);
  for (const Pair& p : pairs) {
    if (p.fold < 0 || p.fold >= num_folds) {
      throw DataError("pair fold index " + std::to_string(p.fold) +
                      " out of range");
    }
    ++total[p.fold];
    if (p.same) ++positive[p.fold];
  }
  for (int f = 0; f < num_folds; ++f) {
    if (total[f] == 0) throw DataError("fold " + std::to_string(f) + " is empty");
    if (total[f] != total[0]) {
      throw DataError("fold " + std::to_string(f) + " has " +
                      std::to_string(total[f]) + " pairs, fold 0 has " +
                      std::to_string(total[0]));
    }
    if (2 * positive[f] != total[f]) {
      throw DataError("fold " + std::to_string(f) +
                      " is not balanced between matched and mismatched pairs");
    }
  }
}

std::vector<std::string> PairSet::ImageIds() const {
  std::set<std::string> ids;
  for (const Pair& p : pairs) {
    ids.insert(p.a);
    ids.insert(p.b);
  }
  return {ids.begin(), ids.end()};
}

size_t PairSet::FoldSize(int fold) const {
  return static_cast<size_t>(std::count_if(
      pairs.begin(), pairs.end(), [&](const Pair& p) { return p.fold == fold; }));
}

ThresholdFit OptimizeThreshold(std::span<const double> scores,
                               std::span<const uint8_t> same) {
  if (scores.empty() || scores.size() != same.size()) {
    throw InvalidArgument("threshold fit needs one label per score");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Group equal scores; per group count positives and negatives.
  std::vector<double> values;
  std::vector<size_t> pos;
  std::vector<size_t> neg;
  for (size_t i : order) {
    if (values.empty() || scores[i] != values.back()) {
      values.push_back(scores[i]);
      pos.push_back(0);
      neg.push_back(0);
    }
    (same[i] ? pos.back() : neg.back())++;
  }
  const size_t total_pos = std::accumulate(pos.begin(), pos.end(), size_t{0});

  // Candidate j puts the first j groups below the threshold.
  ThresholdFit best;
  best.total = scores.size();
  best.threshold = values.front() - 1.0;
  best.correct = total_pos;
  size_t neg_below = 0;
  size_t pos_below = 0;
  for (size_t j = 1; j <= values.size(); ++j) {
    neg_below += neg[j - 1];
    pos_below += pos[j - 1];
    const size_t correct = neg_below + (total_pos - pos_below);
    if (correct > best.correct) {
      best.correct = correct;
      best.threshold = j < values.size() ? (values[j - 1] + values[j]) / 2.0
                                         : values.back() + 1.0;
    }
  }
  return best;
}

ThresholdSet OptimizeThresholds(std::span<const double> clean_scores,
                                const PairSet& pairs) {
  pairs.Validate();
  if (clean_scores.size() != pairs.pairs.size()) {
    throw InvalidArgument("need one clean score per pair");
  }
  ThresholdSet out;
  for (int f = 0; f < pairs.num_folds; ++f) {
    std::vector<double> s;
    std::vector<uint8_t> y;
    for (size_t i = 0; i < pairs.pairs.size(); ++i) {
      if (pairs.pairs[i].fold == f) continue;
      s.push_back(clean_scores[i]);
      y.push_back(pairs.pairs[i].same ? 1 : 0);
    }
    if (s.empty()) {
      throw DataError("fold " + std::to_string(f) +
                      " has no training pairs in the other folds");
    }
    const ThresholdFit fit = OptimizeThreshold(s, y);
    out.thresholds.push_back(fit.threshold);
    out.train_accuracy.push_back(fit.accuracy());
  }
  return out;
}

std::string_view ModeName(Mode mode) {
  return mode == Mode::kNormal ? "normal" : "cross";
}

Mode ModeFromName(std::string_view name) {
  if (name == "normal") return Mode::kNormal;
  if (name == "cross") return Mode::kCross;
  throw InvalidArgument("unknown verification mode '" + std::string(name) + "'");
}

std::string_view SeriesName(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::kSingle: return "single";
    case SeriesKind::kCombined: return "combined";
    case SeriesKind::kWithoutExposure: return "w/oExposure";
  }
  return "?";
}

double MeanOf(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> FoldAccuracies(std::span<const double> scores,
                                   const PairSet& pairs,
                                   const ThresholdSet& thresholds) {
  if (scores.size() != pairs.pairs.size() ||
      thresholds.thresholds.size() != static_cast<size_t>(pairs.num_folds)) {
    throw InvalidArgument("scores, pairs and thresholds disagree in size");
  }
  std::vector<size_t> correct(pairs.num_folds, 0);
  std::vector<size_t> total(pairs.num_folds, 0);
  for (size_t i = 0; i < scores.size(); ++i) {
    const Pair& p = pairs.pairs[i];
    const bool predicted = scores[i] >= thresholds.thresholds[p.fold];
    if (predicted == p.same) ++correct[p.fold];
    ++total[p.fold];
  }
  std::vector<double> acc(pairs.num_folds);
  for (int f = 0; f < pairs.num_folds; ++f) {
    if (total[f] == 0) throw DataError("fold " + std::to_string(f) + " is empty");
    acc[f] = static_cast<double>(correct[f]) / static_cast<double>(total[f]);
  }
  return acc;
}

std::vector<double> CleanScores(const EmbeddingStore& store,
                                const PairSet& pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.pairs.size());
  for (const Pair& p : pairs.pairs) {
    const Embedding& ea = store.At(CleanKey(p.a));
    scores.push_back(CosineSimilarity(ea, store.At(CleanKey(p.b))));
  }
  return scores;
}

RunResult Evaluate(const EmbeddingStore& store, const PairSet& pairs,
                   const ThresholdSet& thresholds, Mode mode,
                   size_t combination, int repeat, CrossSide side) {
  std::vector<double> scores;
  scores.reserve(pairs.pairs.size());
  for (const Pair& p : pairs.pairs) {
    std::string ka = DegradedKey(p.a, combination, repeat);
    std::string kb = DegradedKey(p.b, combination, repeat);
    if (mode == Mode::kCross) {
      if (side == CrossSide::kDegradeB) {
        ka = CleanKey(p.a);
      } else {
        kb = CleanKey(p.b);
      }
    }
    const Embedding& ea = store.At(ka);
    scores.push_back(CosineSimilarity(ea, store.At(kb)));
  }
  RunResult r;
  r.combination = combination;
  r.repeat = repeat;
  r.mode = mode;
  r.fold_accuracy = FoldAccuracies(scores, pairs, thresholds);
  r.mean_accuracy = MeanOf(r.fold_accuracy);
  return r;
}

BenchmarkReport Aggregate(std::span<const RunResult> results,
                          const SweepManifest& manifest) {
  const ParamGrid& grid = manifest.grid;
  std::map<std::tuple<size_t, int, int>, const RunResult*> by_key;
  for (const RunResult& r : results) {
    by_key[{r.combination, r.repeat, static_cast<int>(r.mode)}] = &r;
  }

  BenchmarkReport report;
  std::vector<size_t> missing;
  // Repeat-averaged accuracy per combination index, per mode.
  std::map<size_t, std::array<double, 2>> combo_acc;
  for (const ManifestEntry& e : manifest.entries) {
    std::array<double, 2> sum{0.0, 0.0};
    bool complete = true;
    for (int r = 0; r < e.repeats && complete; ++r) {
      for (Mode m : {Mode::kNormal, Mode::kCross}) {
        auto it = by_key.find({e.index, r, static_cast<int>(m)});
        if (it == by_key.end()) {
          complete = false;
          break;
        }
        sum[static_cast<int>(m)] += it->second->mean_accuracy;
      }
    }
    if (!complete) {
      missing.push_back(e.index);
      continue;
    }
    for (int r = 0; r < e.repeats; ++r) {
      for (Mode m : {Mode::kNormal, Mode::kCross}) {
        report.runs.push_back(*by_key.at({e.index, r, static_cast<int>(m)}));
      }
    }
    const std::array<double, 2> avg{sum[0] / e.repeats, sum[1] / e.repeats};
    combo_acc[e.index] = avg;
    report.combinations.push_back({e.index, e.extreme_count, avg[0], avg[1]});
  }
  if (!missing.empty()) {
    std::string list;
    for (size_t i = 0; i < missing.size(); ++i) {
      if (i == 20) {
        list += ", ... (" + std::to_string(missing.size() - 20) + " more)";
        break;
      }
      list += (i ? ", " : "") + std::to_string(missing[i]);
    }
    throw DataError("results incomplete: " + std::to_string(missing.size()) +
                    " manifest entries lack runs: " + list);
  }

  const size_t exposure_axis = static_cast<size_t>(Axis::kExposure);
  std::optional<size_t> exposure_none;
  for (size_t v = 0; v < grid.AxisSize(Axis::kExposure); ++v) {
    if (grid.IsNone(Axis::kExposure, v)) exposure_none = v;
  }

  for (Axis axis : kAllAxes) {
    const size_t k = static_cast<size_t>(axis);
    // Index of None on every other axis, if the grid has one there.
    std::optional<AxisIndices> single_base = AxisIndices{};
    for (Axis other : kAllAxes) {
      if (other == axis) continue;
      bool found = false;
      for (size_t v = 0; v < grid.AxisSize(other); ++v) {
        if (grid.IsNone(other, v)) {
          (*single_base)[static_cast<size_t>(other)] = v;
          found = true;
        }
      }
      if (!found) single_base.reset();
    }

    for (SeriesKind kind : {SeriesKind::kSingle, SeriesKind::kCombined,
                            SeriesKind::kWithoutExposure}) {
      if (kind == SeriesKind::kSingle && !single_base) continue;
      if (kind == SeriesKind::kWithoutExposure &&
          (axis == Axis::kExposure || !exposure_none)) {
        continue;
      }
      for (Mode mode : {Mode::kNormal, Mode::kCross}) {
        for (size_t v = 0; v < grid.AxisSize(axis); ++v) {
          double sum = 0.0;
          size_t n = 0;
          if (kind == SeriesKind::kSingle) {
            AxisIndices at = *single_base;
            at[k] = v;
            const auto it = combo_acc.find(grid.Compose(at));
            if (it != combo_acc.end()) {
              sum = it->second[static_cast<int>(mode)];
              n = 1;
            }
          } else {
            for (const ManifestEntry& e : manifest.entries) {
              const AxisIndices at = grid.Decompose(e.index);
              if (at[k] != v || e.extreme_count > 1) continue;
              if (kind == SeriesKind::kWithoutExposure &&
                  at[exposure_axis] != *exposure_none) {
                continue;
              }
              sum += combo_acc.at(e.index)[static_cast<int>(mode)];
              ++n;
            }
          }
          if (n == 0) continue;
          SeriesPoint p;
          p.axis = axis;
          p.value_index = v;
          p.value = grid.ValueLabel(axis, v);
          p.mode = mode;
          p.kind = kind;
          p.mean_accuracy = sum / static_cast<double>(n);
          p.n_combos = n;
          report.series.push_back(std::move(p));
        }
      }
    }
  }
  return report;
}

std::string FormatDouble(double v) { return json(v).dump(); }

json RunResultToJson(const RunResult& r) {
  return json{{"combination", r.combination},
              {"repeat", r.repeat},
              {"mode", ModeName(r.mode)},
              {"fold_accuracy", r.fold_accuracy},
              {"mean_accuracy", r.mean_accuracy}};
}

RunResult RunResultFromJson(const json& j) {
  RejectUnknownFields(
      j, {"combination", "repeat", "mode", "fold_accuracy", "mean_accuracy"},
      "run result");
  RunResult r;
  r.combination = j.at("combination").get<size_t>();
  r.repeat = j.at("repeat").get<int>();
  r.mode = ModeFromName(j.at("mode").get<std::string>());
  r.fold_accuracy = j.at("fold_accuracy").get<std::vector<double>>();
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  return r;
}

json SeriesToJson(std::span<const SeriesPoint> series) {
  json out = json::array();
  for (const SeriesPoint& p : series) {
    out.push_back(json{{"axis", AxisName(p.axis)},
                       {"value", p.value},
                       {"mode", ModeName(p.mode)},
                       {"series", SeriesName(p.kind)},
                       {"mean_accuracy", p.mean_accuracy},
                       {"n_combos", p.n_combos}});
  }
  return out;
}

std::string SeriesToCsv(std::span<const SeriesPoint> series) {
  std::string out = "axis,value,mode,series,mean_accuracy,n_combos\n";
  for (const SeriesPoint& p : series) {
    // Kernel labels contain commas.
    const bool quote = p.value.find(',') != std::string::npos;
    out += std::string(AxisName(p.axis)) + "," +
           (quote ? "\"" + p.value + "\"" : p.value) + "," +
           std::string(ModeName(p.mode)) + "," + std::string(SeriesName(p.kind)) +
           "," + FormatDouble(p.mean_accuracy) + "," +
           std::to_string(p.n_combos) + "\n";
  }
  return out;
}

}  // namespace degradekit
