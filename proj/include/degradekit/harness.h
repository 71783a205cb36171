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

// Sweep orchestration: degrade -> embed -> evaluate for every manifest entry,
// resumable at combination granularity, and report generation.
//
// A run directory holds
//   run.json         config, manifest hash, frozen thresholds, clean baseline
//   clean.dkes       clean embeddings (EmbeddingStore format)
//   results.jsonl    one line per finished combination
//   checkpoint.json  finished combination indices, replaced atomically

#ifndef DEGRADEKIT_HARNESS_H_
#define DEGRADEKIT_HARNESS_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "degradekit/embed.h"
#include "degradekit/sweep.h"
#include "degradekit/verify.h"
#include "json.hpp"

namespace degradekit {

inline constexpr int kRunFormatVersion = 1;

struct RunConfig {
  std::string manifest_path;
  std::string pairs_path;
  std::string images_dir;  // images at <dir>/<id>.png
  std::string run_dir;

  std::string provider = "stub";  // stub | random | store | remote
  std::string store_path;         // provider=store
  std::string endpoint;           // provider=remote
  double timeout_seconds = 30.0;
  int retries = 3;
  size_t random_dim = 128;  // provider=random
  uint64_t random_salt = 0;

  int out_size = 112;
  // "aligned": resize inputs to out_size before degrading; "native": degrade
  // at the input resolution.
  std::string degrade_at = "aligned";
  // Image degraded in cross mode: "b" or "a".
  std::string cross_degrade = "b";
  // Free text carried into the report (how the crops were aligned).
  std::string alignment_provenance = "pre-aligned crops (not verified)";
  int jobs = 1;

  void Validate() const;
  nlohmann::json ToJson() const;
  static RunConfig FromJson(const nlohmann::json& j);
  // SHA-256 of the canonical JSON, ignoring `jobs` and `run_dir`.
  std::string Hash() const;
};

std::unique_ptr<EmbeddingProvider> MakeProvider(const RunConfig& config);

struct RunOptions {
  // Stop after this many combinations finish in this invocation
  // (simulated interruption); nullopt runs to completion.
  std::optional<size_t> max_combinations;
  std::function<void(size_t done, size_t total)> progress;
};

struct RunStatus {
  size_t total = 0;
  size_t completed = 0;       // including earlier invocations
  size_t newly_completed = 0;
  bool resumed = false;
};

// Refuses (DataError) to resume a run directory whose manifest hash or
// config differs from the current invocation.
RunStatus RunSweep(const RunConfig& config, const RunOptions& options = {});

struct ReportFiles {
  std::string json;
  std::string csv;
};

// Aggregates a finished run. Throws DataError listing missing combinations
// if the run is incomplete. Output is a pure function of the run directory
// and manifest contents.
ReportFiles BuildReport(const std::filesystem::path& run_dir,
                        const std::filesystem::path& manifest_path);

// Write-temp-then-rename.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace degradekit

#endif  // DEGRADEKIT_HARNESS_H_
