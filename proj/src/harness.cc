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

#include "degradekit/harness.h"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "degradekit/degrade.h"
#include "degradekit/error.h"
#include "degradekit/rng.h"

namespace degradekit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kRunFile = "run.json";
constexpr const char* kCleanStoreFile = "clean.dkes";
constexpr const char* kResultsFile = "results.jsonl";
constexpr const char* kCheckpointFile = "checkpoint.json";

json ThresholdsToJson(const ThresholdSet& t) {
  return json{{"thresholds", t.thresholds},
              {"train_accuracy", t.train_accuracy}};
}

ThresholdSet ThresholdsFromJson(const json& j) {
  ThresholdSet t;
  t.thresholds = j.at("thresholds").get<std::vector<double>>();
  t.train_accuracy = j.at("train_accuracy").get<std::vector<double>>();
  return t;
}

json ParseJsonFile(const fs::path& path) {
  try {
    return json::parse(ReadTextFile(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::set<size_t> LoadCheckpoint(const fs::path& run_dir,
                                const std::string& manifest_hash) {
  const fs::path path = run_dir / kCheckpointFile;
  if (!fs::exists(path)) return {};
  const json j = ParseJsonFile(path);
  if (j.at("manifest_hash").get<std::string>() != manifest_hash) {
    throw DataError("checkpoint " + path.string() +
                    " belongs to a different manifest");
  }
  const auto done = j.at("completed").get<std::vector<size_t>>();
  return {done.begin(), done.end()};
}

// Serializes commits from all workers: results line first, then the
// checkpoint that makes it visible.
class ResultWriter {
 public:
  ResultWriter(const fs::path& run_dir, std::string manifest_hash,
               std::set<size_t> completed)
      : run_dir_(run_dir),
        manifest_hash_(std::move(manifest_hash)),
        completed_(std::move(completed)),
        results_(run_dir / kResultsFile, std::ios::app) {
    if (!results_) throw IoError("cannot open results in " + run_dir.string());
  }

  size_t Commit(size_t combination, const std::vector<RunResult>& runs) {
    json line{{"combination", combination}, {"runs", json::array()}};
    for (const RunResult& r : runs) line["runs"].push_back(RunResultToJson(r));
    std::lock_guard lock(mu_);
    results_ << line.dump() << '\n';
    results_.flush();
    if (!results_) throw IoError("failed to append results");
    completed_.insert(combination);
    const json cp{{"version", kRunFormatVersion},
                  {"manifest_hash", manifest_hash_},
                  {"completed", completed_}};
    WriteFileAtomic(run_dir_ / kCheckpointFile, cp.dump() + "\n");
    return completed_.size();
  }

 private:
  fs::path run_dir_;
  std::string manifest_hash_;
  std::set<size_t> completed_;
  std::ofstream results_;
  std::mutex mu_;
};

}  // namespace

void RunConfig::Validate() const {
  if (provider != "stub" && provider != "random" && provider != "store" &&
      provider != "remote") {
    throw InvalidArgument("unknown provider '" + provider + "'");
  }
  if (provider == "store" && store_path.empty()) {
    throw InvalidArgument("provider 'store' needs a store path");
  }
  if (provider == "remote" && endpoint.empty()) {
    throw InvalidArgument("provider 'remote' needs an endpoint");
  }
  if (degrade_at != "aligned" && degrade_at != "native") {
    throw InvalidArgument("degrade_at must be 'aligned' or 'native'");
  }
  if (cross_degrade != "a" && cross_degrade != "b") {
    throw InvalidArgument("cross_degrade must be 'a' or 'b'");
  }
  if (out_size < 1) throw InvalidArgument("out_size must be positive");
  if (jobs < 1) throw InvalidArgument("jobs must be >= 1");
  if (manifest_path.empty() || pairs_path.empty() || run_dir.empty()) {
    throw InvalidArgument("manifest, pairs and run directory are required");
  }
}

json RunConfig::ToJson() const {
  return json{{"manifest_path", manifest_path},
              {"pairs_path", pairs_path},
              {"images_dir", images_dir},
              {"run_dir", run_dir},
              {"provider", provider},
              {"store_path", store_path},
              {"endpoint", endpoint},
              {"timeout_seconds", timeout_seconds},
              {"retries", retries},
              {"random_dim", random_dim},
              {"random_salt", random_salt},
              {"out_size", out_size},
              {"degrade_at", degrade_at},
              {"cross_degrade", cross_degrade},
              {"alignment_provenance", alignment_provenance},
              {"jobs", jobs}};
}

RunConfig RunConfig::FromJson(const json& j) {
  RejectUnknownFields(
      j,
      {"manifest_path", "pairs_path", "images_dir", "run_dir", "provider",
       "store_path", "endpoint", "timeout_seconds", "retries", "random_dim",
       "random_salt", "out_size", "degrade_at", "cross_degrade",
       "alignment_provenance", "jobs"},
      "run config");
  RunConfig c;
  c.manifest_path = j.at("manifest_path").get<std::string>();
  c.pairs_path = j.at("pairs_path").get<std::string>();
  c.images_dir = j.at("images_dir").get<std::string>();
  c.run_dir = j.at("run_dir").get<std::string>();
  c.provider = j.at("provider").get<std::string>();
  c.store_path = j.at("store_path").get<std::string>();
  c.endpoint = j.at("endpoint").get<std::string>();
  c.timeout_seconds = j.at("timeout_seconds").get<double>();
  c.retries = j.at("retries").get<int>();
  c.random_dim = j.at("random_dim").get<size_t>();
  c.random_salt = j.at("random_salt").get<uint64_t>();
  c.out_size = j.at("out_size").get<int>();
  c.degrade_at = j.at("degrade_at").get<std::string>();
  c.cross_degrade = j.at("cross_degrade").get<std::string>();
  c.alignment_provenance = j.at("alignment_provenance").get<std::string>();
  c.jobs = j.at("jobs").get<int>();
  return c;
}

namespace {

// Config fields that affect results; the run location and worker count do not.
json ResultConfigJson(json j) {
  j.erase("jobs");
  j.erase("run_dir");
  return j;
}

}  // namespace

std::string RunConfig::Hash() const {
  return Sha256Hex(ResultConfigJson(ToJson()).dump());
}

std::unique_ptr<EmbeddingProvider> MakeProvider(const RunConfig& config) {
  if (config.provider == "stub") return std::make_unique<StubEmbedder>();
  if (config.provider == "random") {
    return std::make_unique<RandomEmbedder>(config.random_dim,
                                            config.random_salt);
  }
  if (config.provider == "store") {
    return std::make_unique<StoreEmbedder>(
        EmbeddingStore::Load(config.store_path));
  }
  if (config.provider == "remote") {
    RemoteOptions opt;
    opt.endpoint = config.endpoint;
    opt.timeout_seconds = config.timeout_seconds;
    opt.retries = config.retries;
    if (const char* token = std::getenv(kEmbedTokenEnv)) opt.token = token;
    return std::make_unique<RemoteEmbedder>(opt);
  }
  throw InvalidArgument("unknown provider '" + config.provider + "'");
}

void WriteFileAtomic(const fs::path& path, std::string_view data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunStatus RunSweep(const RunConfig& config, const RunOptions& options) {
  config.Validate();
  const SweepManifest manifest =
      ParseManifest(ReadTextFile(config.manifest_path));
  const std::string manifest_hash = ManifestHash(manifest);
  const PairSet pairs = PairSet::LoadLfw(config.pairs_path);
  const std::vector<std::string> ids = pairs.ImageIds();
  const auto provider = MakeProvider(config);
  const bool native = config.degrade_at == "native";
  const CrossSide side =
      config.cross_degrade == "a" ? CrossSide::kDegradeA : CrossSide::kDegradeB;

  const fs::path run_dir = config.run_dir;
  fs::create_directories(run_dir);

  // Source images, resized to the output size unless degrading natively.
  std::vector<ImageBuf> sources(ids.size());
  if (provider->needs_pixels()) {
    for (size_t i = 0; i < ids.size(); ++i) {
      ImageBuf img = ReadPng(fs::path(config.images_dir) / (ids[i] + ".png"));
      sources[i] = native ? std::move(img)
                          : ResizeBicubic(img, config.out_size, config.out_size);
    }
  }

  RunStatus status;
  status.total = manifest.entries.size();
  ThresholdSet thresholds;
  EmbeddingStore clean;
  const fs::path run_file = run_dir / kRunFile;
  if (fs::exists(run_file)) {
    const json run = ParseJsonFile(run_file);
    const std::string prev_hash = run.at("manifest_hash").get<std::string>();
    if (prev_hash != manifest_hash) {
      throw DataError("manifest hash differs from the one " +
                      run_dir.string() + " was started with (" + prev_hash +
                      " vs " + manifest_hash + "); refusing to resume");
    }
    if (run.at("config_hash").get<std::string>() != config.Hash()) {
      throw DataError("run configuration differs from the one " +
                      run_dir.string() + " was started with; refusing to resume");
    }
    thresholds = ThresholdsFromJson(run.at("thresholds"));
    clean = EmbeddingStore::Load(run_dir / kCleanStoreFile);
    status.resumed = true;
  } else {
    for (size_t i = 0; i < ids.size(); ++i) {
      const std::string key = CleanKey(ids[i]);
      const ImageBuf img =
          provider->needs_pixels()
              ? ResizeBicubic(sources[i], config.out_size, config.out_size)
              : ImageBuf();
      clean.Insert(key, provider->Embed(key, img));
    }
    const std::vector<double> scores = CleanScores(clean, pairs);
    thresholds = OptimizeThresholds(scores, pairs);
    const std::vector<double> baseline = FoldAccuracies(scores, pairs, thresholds);
    const fs::path store_tmp = run_dir / "clean.dkes.tmp";
    clean.Save(store_tmp);
    fs::rename(store_tmp, run_dir / kCleanStoreFile);
    const json run{{"version", kRunFormatVersion},
                   {"config", config.ToJson()},
                   {"config_hash", config.Hash()},
                   {"manifest_hash", manifest_hash},
                   {"provider", provider->name()},
                   {"image_count", ids.size()},
                   {"thresholds", ThresholdsToJson(thresholds)},
                   {"baseline",
                    {{"fold_accuracy", baseline},
                     {"mean_accuracy", MeanOf(baseline)}}}};
    // Written last: its presence means the clean phase finished.
    WriteFileAtomic(run_file, run.dump(2) + "\n");
  }

  std::set<size_t> completed = LoadCheckpoint(run_dir, manifest_hash);
  std::vector<const ManifestEntry*> pending;
  for (const ManifestEntry& e : manifest.entries) {
    if (!completed.contains(e.index)) pending.push_back(&e);
  }
  status.completed = completed.size();
  ResultWriter writer(run_dir, manifest_hash, std::move(completed));

  auto run_entry = [&](const ManifestEntry& e) {
    std::vector<RunResult> runs;
    for (int r = 0; r < e.repeats; ++r) {
      EmbeddingStore store = clean;
      for (size_t i = 0; i < ids.size(); ++i) {
        const std::string key = DegradedKey(ids[i], e.index, r);
        ImageBuf img;
        if (provider->needs_pixels()) {
          img = Degrade(sources[i], e.params,
                        DeriveImageSeed(e.seeds[r], i), config.out_size);
        }
        store.Insert(key, provider->Embed(key, img));
      }
      for (Mode m : {Mode::kNormal, Mode::kCross}) {
        runs.push_back(Evaluate(store, pairs, thresholds, m, e.index, r, side));
      }
    }
    return runs;
  };

  std::atomic<size_t> next{0};
  std::atomic<size_t> finished{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr error;
  const size_t limit = options.max_combinations.value_or(pending.size());

  auto worker = [&] {
    while (!stop.load()) {
      const size_t slot = next.fetch_add(1);
      if (slot >= pending.size() || slot >= limit) return;
      try {
        const ManifestEntry& e = *pending[slot];
        const size_t done = writer.Commit(e.index, run_entry(e));
        finished.fetch_add(1);
        if (options.progress) options.progress(done, status.total);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };

  if (config.jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < config.jobs; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  status.newly_completed = finished.load();
  status.completed += status.newly_completed;
  return status;
}

ReportFiles BuildReport(const fs::path& run_dir, const fs::path& manifest_path) {
  const SweepManifest manifest = ParseManifest(ReadTextFile(manifest_path));
  const std::string manifest_hash = ManifestHash(manifest);
  const json run = ParseJsonFile(run_dir / kRunFile);
  if (run.at("manifest_hash").get<std::string>() != manifest_hash) {
    throw DataError("manifest does not match the run in " + run_dir.string());
  }
  const RunConfig config = RunConfig::FromJson(run.at("config"));
  const std::set<size_t> completed = LoadCheckpoint(run_dir, manifest_hash);

  // Last line per checkpointed combination wins; lines past the checkpoint
  // (a crash between append and checkpoint) are ignored.
  std::map<size_t, std::vector<RunResult>> by_combo;
  const fs::path results_path = run_dir / kResultsFile;
  if (fs::exists(results_path)) {
    std::istringstream in(ReadTextFile(results_path));
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        if (in.peek() == EOF) break;  // torn final write
        throw DataError(results_path.string() + ": line " +
                        std::to_string(line_no) + " is not valid JSON");
      }
      const size_t combo = j.at("combination").get<size_t>();
      if (!completed.contains(combo)) continue;
      std::vector<RunResult> runs;
      for (const json& r : j.at("runs")) runs.push_back(RunResultFromJson(r));
      by_combo[combo] = std::move(runs);
    }
  }
  std::vector<RunResult> results;
  for (auto& [combo, runs] : by_combo) {
    results.insert(results.end(), runs.begin(), runs.end());
  }
  const BenchmarkReport report = Aggregate(results, manifest);

  json combos = json::array();
  size_t run_pos = 0;
  for (const CombinationSummary& c : report.combinations) {
    const ManifestEntry& e = manifest.entries.at(
        static_cast<size_t>(&c - report.combinations.data()));
    json runs = json::array();
    for (int k = 0; k < 2 * e.repeats; ++k) {
      runs.push_back(RunResultToJson(report.runs[run_pos++]));
    }
    combos.push_back(json{{"index", c.index},
                          {"params", ParamsToJson(e.params)},
                          {"extreme_count", c.extreme_count},
                          {"repeats", e.repeats},
                          {"normal_accuracy", c.normal},
                          {"cross_accuracy", c.cross},
                          {"runs", std::move(runs)}});
  }

  const json out{
      {"version", kRunFormatVersion},
      {"config", ResultConfigJson(run.at("config"))},
      {"config_hash", run.at("config_hash")},
      {"manifest_hash", manifest_hash},
      {"metadata",
       {{"grid", GridToJson(manifest.grid)},
        {"global_seed", manifest.global_seed},
        {"seed_scheme", manifest.seed_scheme},
        {"filter_rule", "aggregate combined and w/oExposure over combinations "
                        "with extreme_count <= 1"},
        {"noise_repeats", kNoiseRepeats},
        {"provider", run.at("provider")},
        {"alignment_provenance", config.alignment_provenance},
        {"folds", run.at("thresholds").at("thresholds").size()}}},
      {"thresholds", run.at("thresholds")},
      {"baseline", run.at("baseline")},
      {"combinations", std::move(combos)},
      {"series", SeriesToJson(report.series)}};
  return {out.dump(2) + "\n", SeriesToCsv(report.series)};
}

}  // namespace degradekit
