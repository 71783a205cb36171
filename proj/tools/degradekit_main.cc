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

// degradekit command-line tool.
//
//   degradekit degrade  --input in.png --output out.png [--gamma G]
//                       [--kernel SX,SY,THETA] [--scale R] [--noise S]
//                       [--jpeg Q] [--seed N] [--size PX]
//   degradekit plan     [--grid study|mini|FILE] [--seed N] [--output FILE]
//   degradekit run      --manifest FILE --pairs FILE --run-dir DIR ...
//   degradekit report   --run DIR --manifest FILE [--out-json F] [--out-csv F]
//   degradekit selftest [--dir DIR]
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 remote provider.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "degradekit/degrade.h"
#include "degradekit/embed.h"
#include "degradekit/error.h"
#include "degradekit/harness.h"
#include "degradekit/image.h"
#include "degradekit/rng.h"
#include "degradekit/sweep.h"
#include "degradekit/synthetic.h"
#include "degradekit/verify.h"
#include "json.hpp"

namespace dk = degradekit;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRemote = 3;

dk::KernelParams ParseKernelFlag(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.size() != 3) {
    throw dk::InvalidArgument("--kernel expects SX,SY,THETA, got '" + text + "'");
  }
  auto num = [&](const std::string& s) {
    double v = 0;
    try {
      size_t used = 0;
      v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw dk::InvalidArgument("--kernel: bad number '" + s + "'");
    }
    return v;
  };
  dk::KernelParams k{num(parts[0]), num(parts[1]), dk::ParseTheta(parts[2])};
  k.Validate();
  return k;
}

dk::ParamGrid LoadGrid(const std::string& opts) {
  if (opts == "study") return dk::ParamGrid::StudyGrid();
  if (opts == "mini") return dk::MiniatureGrid();
  dk::ParamGrid g;
  try {
    g = dk::GridFromJson(nlohmann::json::parse(dk::ReadTextFile(opts)));
  } catch (const nlohmann::json::exception& e) {
    throw dk::DataError(opts + ": " + e.what());
  }
  g.Validate();
  return g;
}

struct DegradeArgs {
  std::string input, output;
  std::optional<double> gamma, noise;
  std::optional<std::string> kernel;
  std::optional<int> scale, jpeg;
  uint64_t seed = 0;
  int size = dk::kDefaultOutputSize;
};

int CmdDegrade(const DegradeArgs& a) {
  dk::DegradationParams p;
  p.exposure_gamma = a.gamma;
  if (a.kernel) p.kernel = ParseKernelFlag(*a.kernel);
  p.downscale_ratio = a.scale;
  p.noise_sigma = a.noise;
  p.jpeg_quality = a.jpeg;
  p.Validate();
  const dk::ImageBuf in = dk::ReadPng(a.input);
  const dk::ImageBuf out = dk::Degrade(in, p, a.seed, a.size);
  dk::WritePng(out, a.output);
  nlohmann::json j = dk::ParamsToJson(p);
  j["seed"] = a.seed;
  j["size"] = a.size;
  std::cout << j.dump() << "\n";
  return kExitOk;
}

struct PlanArgs {
  std::string grid = "study";
  uint64_t seed = 0;
  std::string output;
};

int CmdPlan(const PlanArgs& a) {
  const dk::ParamGrid grid = LoadGrid(a.grid);
  const dk::SweepManifest m = dk::PlanRuns(grid, a.seed);
  size_t retained = 0;
  for (const auto& e : m.entries) retained += e.extreme_count <= 1;
  if (!a.output.empty()) {
    dk::WriteFileAtomic(a.output, dk::SerializeManifest(m));
  }
  std::cout << "combinations: " << m.entries.size() << "\n"
            << "retained (<= 1 extreme): " << retained << "\n"
            << "runs: " << dk::TotalRuns(m) << "\n"
            << "manifest_hash: " << dk::ManifestHash(m) << "\n";
  return kExitOk;
}

int CmdRun(const dk::RunConfig& config, std::optional<size_t> max_combos,
           bool quiet) {
  dk::RunOptions opt;
  opt.max_combinations = max_combos;
  if (!quiet) {
    opt.progress = [](size_t done, size_t total) {
      if (done % 25 == 0 || done == total) {
        std::cerr << "\r" << done << "/" << total << std::flush;
      }
    };
  }
  const dk::RunStatus s = dk::RunSweep(config, opt);
  if (!quiet) std::cerr << "\n";
  std::cout << (s.resumed ? "resumed" : "started") << ": " << s.completed
            << "/" << s.total << " combinations complete ("
            << s.newly_completed << " this invocation)\n";
  return kExitOk;
}

struct ReportArgs {
  std::string run_dir, manifest, out_json, out_csv;
};

int CmdReport(const ReportArgs& a) {
  const dk::ReportFiles r = dk::BuildReport(a.run_dir, a.manifest);
  const fs::path json_path =
      a.out_json.empty() ? fs::path(a.run_dir) / "report.json" : fs::path(a.out_json);
  const fs::path csv_path =
      a.out_csv.empty() ? fs::path(a.run_dir) / "series.csv" : fs::path(a.out_csv);
  dk::WriteFileAtomic(json_path, r.json);
  dk::WriteFileAtomic(csv_path, r.csv);
  std::cout << "wrote " << json_path.string() << " and " << csv_path.string()
            << "\n";
  return kExitOk;
}

bool Check(const char* name, bool ok) {
  std::cout << (ok ? "ok    " : "FAIL  ") << name << "\n";
  return ok;
}

int CmdSelftest(const std::string& dir) {
  bool ok = true;
  {
    const dk::SweepManifest m = dk::PlanRuns(dk::ParamGrid::StudyGrid(), 0);
    size_t retained = 0;
    for (const auto& e : m.entries) retained += e.extreme_count <= 1;
    ok &= Check("grid counts 11760/9070/52080",
                m.entries.size() == 11760 && retained == 9070 &&
                    dk::TotalRuns(m) == 52080);
  }
  {
    bool sums = true;
    for (const auto& k : dk::ParamGrid::StudyGrid().kernels) {
      if (!k.value) continue;
      double s = 0;
      for (double w : dk::MakeGaussianKernel(*k.value).w) s += w;
      sums &= std::fabs(s - 1.0) < 1e-12;
    }
    ok &= Check("blur kernels normalized", sums);
  }
  ok &= Check("exposure 128 at gamma 2 -> 192",
              dk::QuantizeSample(dk::ExposeSample(128 / 255.0, 2.0)) == 192);
  {
    const auto t = dk::MakeJpegQuantTables(50);
    ok &= Check("jpeg q50 tables", t.luma == dk::kAnnexKLuma &&
                                       t.chroma == dk::kAnnexKChroma);
  }
  if (!dir.empty()) {
    dk::SyntheticOptions opts;
    opts.images_per_identity = 3;
    opts.pairs_per_fold = 15;
    const fs::path root = dir;
    dk::WriteSyntheticDataset(opts, root / "data");
    dk::WriteFileAtomic(root / "manifest.json",
                        dk::SerializeManifest(dk::PlanRuns(dk::MiniatureGrid(), 7)));
    dk::RunConfig c;
    c.manifest_path = (root / "manifest.json").string();
    c.pairs_path = (root / "data" / "pairs.txt").string();
    c.images_dir = (root / "data" / "images").string();
    c.run_dir = (root / "run").string();
    dk::RunSweep(c);
    const dk::ReportFiles r = dk::BuildReport(c.run_dir, c.manifest_path);
    dk::WriteFileAtomic(root / "run" / "report.json", r.json);
    dk::WriteFileAtomic(root / "run" / "series.csv", r.csv);
    ok &= Check("miniature stub sweep", !r.csv.empty());
  }
  return ok ? kExitOk : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image degradation benchmark for face verification"};
  app.require_subcommand(1);

  DegradeArgs deg;
  auto* degrade = app.add_subcommand("degrade", "Degrade one image");
  degrade->add_option("--input", deg.input, "Input PNG")->required();
  degrade->add_option("--output", deg.output, "Output PNG")->required();
  degrade->add_option("--gamma", deg.gamma, "Exposure gamma");
  degrade->add_option("--kernel", deg.kernel,
                      "Blur kernel SX,SY,THETA (theta: number, pi/4, 3pi/4)");
  degrade->add_option("--scale", deg.scale, "Integer downscale ratio");
  degrade->add_option("--noise", deg.noise, "Gaussian noise sigma (0-255 scale)");
  degrade->add_option("--jpeg", deg.jpeg, "JPEG quality 1-100");
  degrade->add_option("--seed", deg.seed, "Noise seed");
  degrade->add_option("--size", deg.size, "Output side length")
      ->check(CLI::PositiveNumber);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Enumerate and seed the sweep");
  plan_cmd->add_option("--grid", plan.grid, "study, mini, or a grid JSON file");
  plan_cmd->add_option("--seed", plan.seed, "Global seed");
  plan_cmd->add_option("--output", plan.output, "Manifest output (JSONL)");

  dk::RunConfig cfg;
  std::optional<size_t> max_combos;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Execute a manifest (resumable)");
  run->add_option("--manifest", cfg.manifest_path, "Manifest from plan")->required();
  run->add_option("--pairs", cfg.pairs_path, "LFW-format pairs file")->required();
  run->add_option("--images", cfg.images_dir, "Directory of <id>.png crops");
  run->add_option("--run-dir", cfg.run_dir, "Run directory")->required();
  run->add_option("--provider", cfg.provider, "stub, random, store, or remote")
      ->check(CLI::IsMember({"stub", "random", "store", "remote"}));
  run->add_option("--store", cfg.store_path, "Embedding store (provider=store)");
  run->add_option("--endpoint", cfg.endpoint,
                  "Embedding service URL (provider=remote); token from " +
                      std::string(dk::kEmbedTokenEnv));
  run->add_option("--timeout", cfg.timeout_seconds, "Remote timeout, seconds");
  run->add_option("--retries", cfg.retries, "Remote retries");
  run->add_option("--random-dim", cfg.random_dim, "Dimension (provider=random)");
  run->add_option("--random-salt", cfg.random_salt, "Salt (provider=random)");
  run->add_option("--size", cfg.out_size, "Aligned crop side length");
  run->add_option("--degrade-at", cfg.degrade_at, "aligned or native")
      ->check(CLI::IsMember({"aligned", "native"}));
  run->add_option("--cross-degrade", cfg.cross_degrade,
                  "Pair image degraded in cross mode: a or b")
      ->check(CLI::IsMember({"a", "b"}));
  run->add_option("--alignment", cfg.alignment_provenance,
                  "How the crops were aligned (recorded in the report)");
  run->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--max-combinations", max_combos,
                  "Stop after this many combinations");
  run->add_flag("--quiet", quiet, "No progress output");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Aggregate a finished run");
  report->add_option("--run", rep.run_dir, "Run directory")->required();
  report->add_option("--manifest", rep.manifest, "Manifest of the run")->required();
  report->add_option("--out-json", rep.out_json, "Report JSON path");
  report->add_option("--out-csv", rep.out_csv, "Series CSV path");

  std::string selftest_dir;
  auto* selftest = app.add_subcommand("selftest", "Built-in sanity checks");
  selftest->add_option("--dir", selftest_dir,
                       "Also run a miniature stub sweep in this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*degrade) return CmdDegrade(deg);
    if (*plan_cmd) return CmdPlan(plan);
    if (*run) return CmdRun(cfg, max_combos, quiet);
    if (*report) return CmdReport(rep);
    if (*selftest) return CmdSelftest(selftest_dir);
  } catch (const dk::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dk::RemoteError& e) {
    std::cerr << "remote error: " << e.what() << "\n";
    return kExitRemote;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
