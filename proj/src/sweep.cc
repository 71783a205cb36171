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

#include "degradekit/sweep.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <numbers>
#include <string>

#include "degradekit/error.h"
#include "degradekit/rng.h"

namespace degradekit {

using nlohmann::json;

namespace {

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

template <typename T>
std::optional<size_t> Find(const std::vector<AxisEntry<T>>& axis,
                           const std::optional<T>& value) {
  for (size_t i = 0; i < axis.size(); ++i) {
    if (axis[i].value == value) return i;
  }
  return std::nullopt;
}

template <typename T>
void ValidateAxis(const std::vector<AxisEntry<T>>& axis, Axis which) {
  const std::string name(AxisName(which));
  if (axis.empty()) throw InvalidArgument("grid axis '" + name + "' is empty");
  for (size_t i = 0; i < axis.size(); ++i) {
    if (!axis[i].value && axis[i].extreme) {
      throw InvalidArgument("grid axis '" + name + "': None cannot be extreme");
    }
    for (size_t j = 0; j < i; ++j) {
      if (axis[j].value == axis[i].value) {
        throw InvalidArgument("grid axis '" + name + "' has a duplicate value");
      }
    }
  }
}

template <typename T, typename ToJson>
json AxisToJson(const std::vector<AxisEntry<T>>& axis, ToJson to_json) {
  json out = json::array();
  for (const auto& e : axis) {
    json v = e.value ? to_json(*e.value) : json(nullptr);
    if (e.extreme) {
      out.push_back(json{{"value", v}, {"extreme", true}});
    } else {
      out.push_back(v);
    }
  }
  return out;
}

template <typename T, typename FromJson>
std::vector<AxisEntry<T>> AxisFromJson(const json& j, std::string_view name,
                                       FromJson from_json) {
  if (!j.is_array()) {
    throw DataError("grid axis '" + std::string(name) + "' must be an array");
  }
  std::vector<AxisEntry<T>> out;
  for (const auto& item : j) {
    AxisEntry<T> e;
    const json* v = &item;
    if (item.is_object() && item.contains("extreme")) {
      RejectUnknownFields(item, {"value", "extreme"}, "grid entry");
      e.extreme = item.at("extreme").get<bool>();
      v = &item.at("value");
    }
    if (!v->is_null()) e.value = from_json(*v);
    out.push_back(e);
  }
  return out;
}

template <typename T>
json OptionalToJson(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> OptionalFromJson(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string_view AxisName(Axis axis) {
  switch (axis) {
    case Axis::kNoise: return "noise";
    case Axis::kJpeg: return "jpeg";
    case Axis::kDownscale: return "downscale";
    case Axis::kKernel: return "kernel";
    case Axis::kExposure: return "exposure";
  }
  return "?";
}

Axis AxisFromName(std::string_view name) {
  for (Axis a : kAllAxes) {
    if (AxisName(a) == name) return a;
  }
  throw InvalidArgument("unknown axis '" + std::string(name) + "'");
}

ParamGrid ParamGrid::StudyGrid() {
  const double pi = std::numbers::pi;
  ParamGrid g;
  g.noise_sigmas = {{}, {2.0}, {4.0}, {8.0}, {16.0}, {32.0}, {64.0, true}};
  g.jpeg_qualities = {{}, {64}, {32}, {16}, {8}, {4, true}};
  g.downscale_ratios = {{}, {2}, {3}, {4}, {8, true}};
  g.kernels = {{},
               {KernelParams{1, 1, 0}},
               {KernelParams{2, 2, 0}},
               {KernelParams{3, 3, 0}, true},
               {KernelParams{1, 3, 0}},
               {KernelParams{1, 3, pi / 4}},
               {KernelParams{1, 3, pi / 2}},
               {KernelParams{1, 3, 3 * pi / 4}}};
  g.exposure_gammas = {{0.125, true}, {0.25}, {0.5}, {},
                       {2.0},         {4.0},  {8.0, true}};
  return g;
}

void ParamGrid::Validate() const {
  ValidateAxis(noise_sigmas, Axis::kNoise);
  ValidateAxis(jpeg_qualities, Axis::kJpeg);
  ValidateAxis(downscale_ratios, Axis::kDownscale);
  ValidateAxis(kernels, Axis::kKernel);
  ValidateAxis(exposure_gammas, Axis::kExposure);
  // Each axis value is checked once, with the other axes at index 0.
  for (Axis a : kAllAxes) {
    for (size_t v = 0; v < AxisSize(a); ++v) {
      AxisIndices at{};
      at[static_cast<size_t>(a)] = v;
      ParamsAt(at).Validate();
    }
  }
}

size_t ParamGrid::AxisSize(Axis axis) const {
  switch (axis) {
    case Axis::kNoise: return noise_sigmas.size();
    case Axis::kJpeg: return jpeg_qualities.size();
    case Axis::kDownscale: return downscale_ratios.size();
    case Axis::kKernel: return kernels.size();
    case Axis::kExposure: return exposure_gammas.size();
  }
  return 0;
}

size_t ParamGrid::CombinationCount() const {
  size_t n = 1;
  for (Axis a : kAllAxes) n *= AxisSize(a);
  return n;
}

AxisIndices ParamGrid::Decompose(size_t index) const {
  if (index >= CombinationCount()) {
    throw InvalidArgument("combination index " + std::to_string(index) +
                          " out of range");
  }
  AxisIndices at{};
  for (size_t k = kNumAxes; k-- > 0;) {
    const size_t n = AxisSize(kAllAxes[k]);
    at[k] = index % n;
    index /= n;
  }
  return at;
}

size_t ParamGrid::Compose(const AxisIndices& at) const {
  size_t index = 0;
  for (size_t k = 0; k < kNumAxes; ++k) {
    const size_t n = AxisSize(kAllAxes[k]);
    if (at[k] >= n) throw InvalidArgument("axis index out of range");
    index = index * n + at[k];
  }
  return index;
}

DegradationParams ParamGrid::ParamsAt(const AxisIndices& at) const {
  DegradationParams p;
  p.noise_sigma = noise_sigmas.at(at[0]).value;
  p.jpeg_quality = jpeg_qualities.at(at[1]).value;
  p.downscale_ratio = downscale_ratios.at(at[2]).value;
  p.kernel = kernels.at(at[3]).value;
  p.exposure_gamma = exposure_gammas.at(at[4]).value;
  return p;
}

AxisIndices ParamGrid::Locate(const DegradationParams& p) const {
  const std::optional<size_t> found[kNumAxes] = {
      Find(noise_sigmas, p.noise_sigma), Find(jpeg_qualities, p.jpeg_quality),
      Find(downscale_ratios, p.downscale_ratio), Find(kernels, p.kernel),
      Find(exposure_gammas, p.exposure_gamma)};
  AxisIndices at{};
  for (size_t k = 0; k < kNumAxes; ++k) {
    if (!found[k]) {
      throw InvalidArgument("value on axis '" +
                            std::string(AxisName(kAllAxes[k])) +
                            "' is not in the grid");
    }
    at[k] = *found[k];
  }
  return at;
}

bool ParamGrid::IsNone(Axis axis, size_t v) const {
  switch (axis) {
    case Axis::kNoise: return !noise_sigmas.at(v).value;
    case Axis::kJpeg: return !jpeg_qualities.at(v).value;
    case Axis::kDownscale: return !downscale_ratios.at(v).value;
    case Axis::kKernel: return !kernels.at(v).value;
    case Axis::kExposure: return !exposure_gammas.at(v).value;
  }
  return false;
}

bool ParamGrid::IsExtreme(Axis axis, size_t v) const {
  switch (axis) {
    case Axis::kNoise: return noise_sigmas.at(v).extreme;
    case Axis::kJpeg: return jpeg_qualities.at(v).extreme;
    case Axis::kDownscale: return downscale_ratios.at(v).extreme;
    case Axis::kKernel: return kernels.at(v).extreme;
    case Axis::kExposure: return exposure_gammas.at(v).extreme;
  }
  return false;
}

std::string ParamGrid::ValueLabel(Axis axis, size_t v) const {
  if (IsNone(axis, v)) return "None";
  switch (axis) {
    case Axis::kNoise: return FormatNumber(*noise_sigmas[v].value);
    case Axis::kJpeg: return std::to_string(*jpeg_qualities[v].value);
    case Axis::kDownscale: return std::to_string(*downscale_ratios[v].value);
    case Axis::kKernel: {
      const KernelParams& k = *kernels[v].value;
      return "(" + FormatNumber(k.sigma_x) + "," + FormatNumber(k.sigma_y) +
             "," + FormatTheta(k.theta) + ")";
    }
    case Axis::kExposure: return FormatNumber(*exposure_gammas[v].value);
  }
  return "?";
}

std::vector<DegradationParams> EnumerateCombinations(const ParamGrid& grid) {
  const size_t n = grid.CombinationCount();
  std::vector<DegradationParams> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(grid.ParamsAt(i));
  return out;
}

int ExtremeCount(const AxisIndices& at, const ParamGrid& grid) {
  int count = 0;
  for (size_t k = 0; k < kNumAxes; ++k) {
    if (grid.IsExtreme(kAllAxes[k], at[k])) ++count;
  }
  return count;
}

int ExtremeCount(const DegradationParams& p, const ParamGrid& grid) {
  return ExtremeCount(grid.Locate(p), grid);
}

std::vector<DegradationParams> FilterAtMostOneExtreme(
    const std::vector<DegradationParams>& combos, const ParamGrid& grid) {
  std::vector<DegradationParams> out;
  std::copy_if(combos.begin(), combos.end(), std::back_inserter(out),
               [&](const DegradationParams& p) {
                 return ExtremeCount(p, grid) <= 1;
               });
  return out;
}

SweepManifest PlanRuns(const ParamGrid& grid, uint64_t global_seed) {
  grid.Validate();
  SweepManifest m;
  m.grid = grid;
  m.global_seed = global_seed;
  m.seed_scheme = kSeedScheme;
  const size_t n = grid.CombinationCount();
  m.entries.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const AxisIndices at = grid.Decompose(i);
    ManifestEntry e;
    e.index = i;
    e.params = grid.ParamsAt(at);
    e.extreme_count = ExtremeCount(at, grid);
    e.repeats = e.params.noise_sigma ? kNoiseRepeats : 1;
    for (int r = 0; r < e.repeats; ++r) {
      e.seeds.push_back(DeriveRunSeed(global_seed, i, r));
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

size_t TotalRuns(const SweepManifest& manifest) {
  size_t total = 0;
  for (const auto& e : manifest.entries) total += e.repeats;
  return total;
}

void RejectUnknownFields(const json& j,
                         std::initializer_list<std::string_view> allowed,
                         std::string_view what) {
  if (!j.is_object()) {
    throw DataError(std::string(what) + " must be a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw DataError("unknown field '" + key + "' in " + std::string(what));
    }
  }
}

json KernelToJson(const KernelParams& k) {
  return json{{"sigma_x", k.sigma_x},
              {"sigma_y", k.sigma_y},
              {"theta", FormatTheta(k.theta)}};
}

KernelParams KernelFromJson(const json& j) {
  KernelParams k;
  if (j.is_array()) {
    if (j.size() != 3) throw DataError("kernel array must have 3 elements");
    k.sigma_x = j[0].get<double>();
    k.sigma_y = j[1].get<double>();
    k.theta = j[2].is_string() ? ParseTheta(j[2].get<std::string>())
                               : j[2].get<double>();
    return k;
  }
  RejectUnknownFields(j, {"sigma_x", "sigma_y", "theta"}, "kernel");
  k.sigma_x = j.at("sigma_x").get<double>();
  k.sigma_y = j.at("sigma_y").get<double>();
  const json& t = j.at("theta");
  k.theta = t.is_string() ? ParseTheta(t.get<std::string>()) : t.get<double>();
  return k;
}

json ParamsToJson(const DegradationParams& p) {
  return json{
      {"exposure_gamma", OptionalToJson(p.exposure_gamma)},
      {"kernel", p.kernel ? KernelToJson(*p.kernel) : json(nullptr)},
      {"downscale_ratio", OptionalToJson(p.downscale_ratio)},
      {"noise_sigma", OptionalToJson(p.noise_sigma)},
      {"jpeg_quality", OptionalToJson(p.jpeg_quality)},
  };
}

DegradationParams ParamsFromJson(const json& j) {
  RejectUnknownFields(j,
                      {"exposure_gamma", "kernel", "downscale_ratio",
                       "noise_sigma", "jpeg_quality"},
                      "degradation params");
  DegradationParams p;
  p.exposure_gamma = OptionalFromJson<double>(j, "exposure_gamma");
  if (j.contains("kernel") && !j.at("kernel").is_null()) {
    p.kernel = KernelFromJson(j.at("kernel"));
  }
  p.downscale_ratio = OptionalFromJson<int>(j, "downscale_ratio");
  p.noise_sigma = OptionalFromJson<double>(j, "noise_sigma");
  p.jpeg_quality = OptionalFromJson<int>(j, "jpeg_quality");
  return p;
}

json GridToJson(const ParamGrid& g) {
  auto plain = [](auto v) { return json(v); };
  return json{
      {"noise_sigmas", AxisToJson(g.noise_sigmas, plain)},
      {"jpeg_qualities", AxisToJson(g.jpeg_qualities, plain)},
      {"downscale_ratios", AxisToJson(g.downscale_ratios, plain)},
      {"kernels", AxisToJson(g.kernels, KernelToJson)},
      {"exposure_gammas", AxisToJson(g.exposure_gammas, plain)},
  };
}

ParamGrid GridFromJson(const json& j) {
  RejectUnknownFields(j,
                      {"noise_sigmas", "jpeg_qualities", "downscale_ratios",
                       "kernels", "exposure_gammas"},
                      "grid");
  ParamGrid g;
  g.noise_sigmas = AxisFromJson<double>(
      j.at("noise_sigmas"), "noise", [](const json& v) { return v.get<double>(); });
  g.jpeg_qualities = AxisFromJson<int>(
      j.at("jpeg_qualities"), "jpeg", [](const json& v) { return v.get<int>(); });
  g.downscale_ratios = AxisFromJson<int>(
      j.at("downscale_ratios"), "downscale",
      [](const json& v) { return v.get<int>(); });
  g.kernels = AxisFromJson<KernelParams>(j.at("kernels"), "kernel",
                                         KernelFromJson);
  g.exposure_gammas = AxisFromJson<double>(
      j.at("exposure_gammas"), "exposure",
      [](const json& v) { return v.get<double>(); });
  g.Validate();
  return g;
}

std::string SerializeManifest(const SweepManifest& m) {
  const json header{{"version", m.version},
                    {"global_seed", m.global_seed},
                    {"seed_scheme", m.seed_scheme},
                    {"grid", GridToJson(m.grid)}};
  std::string out = "{\n\"header\": " + header.dump() + ",\n\"entries\": [";
  for (size_t i = 0; i < m.entries.size(); ++i) {
    const ManifestEntry& e = m.entries[i];
    const json entry{{"index", e.index},
                     {"params", ParamsToJson(e.params)},
                     {"extreme_count", e.extreme_count},
                     {"repeats", e.repeats},
                     {"seeds", e.seeds}};
    out += i == 0 ? "\n" : ",\n";
    out += entry.dump();
  }
  out += "\n]\n}\n";
  return out;
}

SweepManifest ParseManifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    RejectUnknownFields(j, {"header", "entries"}, "manifest");
    const json& h = j.at("header");
    RejectUnknownFields(h, {"version", "global_seed", "seed_scheme", "grid"},
                        "manifest header");
    SweepManifest m;
    m.version = h.at("version").get<int>();
    if (m.version != kManifestVersion) {
      throw DataError("unsupported manifest version " +
                      std::to_string(m.version));
    }
    m.global_seed = h.at("global_seed").get<uint64_t>();
    m.seed_scheme = h.at("seed_scheme").get<std::string>();
    m.grid = GridFromJson(h.at("grid"));
    for (const json& ej : j.at("entries")) {
      RejectUnknownFields(ej,
                          {"index", "params", "extreme_count", "repeats", "seeds"},
                          "manifest entry");
      ManifestEntry e;
      e.index = ej.at("index").get<size_t>();
      e.params = ParamsFromJson(ej.at("params"));
      e.extreme_count = ej.at("extreme_count").get<int>();
      e.repeats = ej.at("repeats").get<int>();
      e.seeds = ej.at("seeds").get<std::vector<uint64_t>>();
      if (e.seeds.size() != static_cast<size_t>(e.repeats)) {
        throw DataError("manifest entry " + std::to_string(e.index) +
                        ": seed count does not match repeats");
      }
      if (!m.entries.empty() && e.index <= m.entries.back().index) {
        throw DataError("manifest entries must be sorted by index");
      }
      const std::string where = "manifest entry " + std::to_string(e.index);
      if (e.index >= m.grid.CombinationCount()) {
        throw DataError(where + ": index outside the grid");
      }
      const AxisIndices at = m.grid.Decompose(e.index);
      if (!(e.params == m.grid.ParamsAt(at)) ||
          e.extreme_count != ExtremeCount(at, m.grid) ||
          e.repeats != (e.params.noise_sigma ? kNoiseRepeats : 1)) {
        throw DataError(where + ": does not match the grid");
      }
      if (m.seed_scheme == kSeedScheme) {
        for (int r = 0; r < e.repeats; ++r) {
          if (e.seeds[r] != DeriveRunSeed(m.global_seed, e.index, r)) {
            throw DataError(where + ": seed does not follow the seed scheme");
          }
        }
      }
      m.entries.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw DataError("SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string ManifestHash(const SweepManifest& manifest) {
  return Sha256Hex(SerializeManifest(manifest));
}

}  // namespace degradekit
