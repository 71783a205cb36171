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

// Face embeddings and the providers that produce them. The recognition model
// itself lives outside this library; providers only have to return a feature
// vector for a 112x112 crop.

#ifndef DEGRADEKIT_EMBED_H_
#define DEGRADEKIT_EMBED_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "degradekit/image.h"

namespace degradekit {

// Unit-L2-norm feature vector.
class Embedding {
 public:
  Embedding() = default;

  // Normalizes `values`. Throws DataError for an empty or zero vector.
  static Embedding FromRaw(std::vector<float> values);
  // Takes `values` as already normalized (used by the store loader so bytes
  // survive a round trip untouched).
  static Embedding FromNormalized(std::vector<float> values);

  size_t dim() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  double Norm() const;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  explicit Embedding(std::vector<float> v) : values_(std::move(v)) {}
  std::vector<float> values_;
};

double CosineSimilarity(const Embedding& a, const Embedding& b);

// Store keys: "<image id>@clean" or "<image id>@c<combination>r<repeat>".
std::string CleanKey(std::string_view image_id);
std::string DegradedKey(std::string_view image_id, size_t combination,
                        int repeat);

// Keyed embeddings sharing one dimension. Keys are unique and kept in
// insertion order so a loaded store saves back byte-identically.
class EmbeddingStore {
 public:
  static constexpr uint32_t kVersion = 1;

  // Throws DimMismatchError or DataError on a duplicate key.
  void Insert(std::string key, Embedding embedding);
  // Throws MissingKeyError.
  const Embedding& At(std::string_view key) const;
  bool Contains(std::string_view key) const;

  size_t size() const { return keys_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<std::string>& keys() const { return keys_; }

  // Binary layout, little-endian:
  //   "DKES" | u32 version | u32 dim | u32 count |
  //   count x (u32 key_len | key bytes | dim x f32)
  std::vector<uint8_t> Serialize() const;
  static EmbeddingStore Deserialize(std::span<const uint8_t> bytes);
  void Save(const std::filesystem::path& path) const;
  static EmbeddingStore Load(const std::filesystem::path& path);

 private:
  size_t dim_ = 0;
  std::vector<std::string> keys_;
  std::vector<Embedding> values_;
  std::unordered_map<std::string, size_t> index_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  // Whether Embed() looks at pixels. Providers that do not let the harness
  // skip image degradation entirely.
  virtual bool needs_pixels() const { return true; }
  // Must be safe to call concurrently.
  virtual Embedding Embed(std::string_view key, const ImageBuf& image) const = 0;
};

// Deterministic 64-d test embedder: gray, bicubic to 8x8, mean-subtract,
// normalize. A constant image maps to the first basis vector.
class StubEmbedder : public EmbeddingProvider {
 public:
  std::string name() const override { return "stub"; }
  Embedding Embed(std::string_view key, const ImageBuf& image) const override;
  Embedding Embed(const ImageBuf& image) const { return Embed({}, image); }
};

// Pseudo-random unit vectors keyed by the store key, independent across
// keys. Scores carry no identity information, so accuracy sits at chance.
class RandomEmbedder : public EmbeddingProvider {
 public:
  explicit RandomEmbedder(size_t dim = 128, uint64_t salt = 0)
      : dim_(dim), salt_(salt) {}
  std::string name() const override { return "random"; }
  bool needs_pixels() const override { return false; }
  Embedding Embed(std::string_view key, const ImageBuf& image) const override;

 private:
  size_t dim_;
  uint64_t salt_;
};

// Serves precomputed embeddings; every key the run asks for must exist.
class StoreEmbedder : public EmbeddingProvider {
 public:
  explicit StoreEmbedder(EmbeddingStore store) : store_(std::move(store)) {}
  std::string name() const override { return "store"; }
  bool needs_pixels() const override { return false; }
  Embedding Embed(std::string_view key,
                  const ImageBuf& /*image*/) const override {
    return store_.At(key);
  }

 private:
  EmbeddingStore store_;
};

struct RemoteOptions {
  // e.g. "http://127.0.0.1:8080/embed"
  std::string endpoint;
  double timeout_seconds = 30.0;
  // Extra attempts after the first, only on transport failures.
  int retries = 3;
  int backoff_ms = 100;
  // Sent as "Authorization: Bearer <token>" when non-empty.
  std::string token;
  // 0 = adopt the dim of the first response.
  size_t expected_dim = 0;
};

// Environment variable consulted for the bearer token.
inline constexpr const char* kEmbedTokenEnv = "DEGRADEKIT_EMBED_TOKEN";

// POSTs the crop as image/png and expects {"dim": n, "values": [...]}.
class RemoteEmbedder : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteOptions options);
  std::string name() const override { return "remote:" + options_.endpoint; }
  Embedding Embed(std::string_view key, const ImageBuf& image) const override;

  // Exact request body for an image; equal images give equal bodies.
  static std::vector<uint8_t> RequestBody(const ImageBuf& image);

 private:
  RemoteOptions options_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::atomic<size_t> dim_;
};

}  // namespace degradekit

#endif  // DEGRADEKIT_EMBED_H_
