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

#include "degradekit/embed.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "degradekit/error.h"
#include "degradekit/rng.h"

namespace degradekit {
namespace {

constexpr char kMagic[4] = {'D', 'K', 'E', 'S'};

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  bool Has(size_t n) const { return bytes_.size() - pos_ >= n; }
  size_t remaining() const { return bytes_.size() - pos_; }

  uint32_t U32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  std::string Str(size_t n) {
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Embedding Embedding::FromRaw(std::vector<float> values) {
  if (values.empty()) throw DataError("empty embedding");
  double sq = 0.0;
  for (float v : values) {
    if (!std::isfinite(v)) throw DataError("embedding has non-finite values");
    sq += static_cast<double>(v) * v;
  }
  if (sq == 0.0) throw DataError("zero embedding cannot be normalized");
  const double inv = 1.0 / std::sqrt(sq);
  for (float& v : values) v = static_cast<float>(v * inv);
  return Embedding(std::move(values));
}

Embedding Embedding::FromNormalized(std::vector<float> values) {
  return Embedding(std::move(values));
}

double Embedding::Norm() const {
  double sq = 0.0;
  for (float v : values_) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

double CosineSimilarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw DimMismatchError(a.dim(), b.dim());
  auto va = a.values();
  auto vb = b.values();
  double dot = 0.0;
  for (size_t i = 0; i < va.size(); ++i) dot += static_cast<double>(va[i]) * vb[i];
  return dot;
}

std::string CleanKey(std::string_view image_id) {
  return std::string(image_id) + "@clean";
}

std::string DegradedKey(std::string_view image_id, size_t combination,
                        int repeat) {
  return std::string(image_id) + "@c" + std::to_string(combination) + "r" +
         std::to_string(repeat);
}

void EmbeddingStore::Insert(std::string key, Embedding embedding) {
  if (!keys_.empty() && embedding.dim() != dim_) {
    throw DimMismatchError(dim_, embedding.dim());
  }
  if (index_.contains(key)) {
    throw DataError("duplicate embedding key '" + key + "'");
  }
  dim_ = embedding.dim();
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  values_.push_back(std::move(embedding));
}

const Embedding& EmbeddingStore::At(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) throw MissingKeyError(std::string(key));
  return values_[it->second];
}

bool EmbeddingStore::Contains(std::string_view key) const {
  return index_.contains(std::string(key));
}

std::vector<uint8_t> EmbeddingStore::Serialize() const {
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  PutU32(out, kVersion);
  PutU32(out, static_cast<uint32_t>(dim_));
  PutU32(out, static_cast<uint32_t>(keys_.size()));
  for (size_t i = 0; i < keys_.size(); ++i) {
    PutU32(out, static_cast<uint32_t>(keys_[i].size()));
    out.insert(out.end(), keys_[i].begin(), keys_[i].end());
    for (float v : values_[i].values()) PutU32(out, std::bit_cast<uint32_t>(v));
  }
  return out;
}

EmbeddingStore EmbeddingStore::Deserialize(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  if (!r.Has(16) || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("embedding store: bad magic");
  }
  r.Str(4);
  const uint32_t version = r.U32();
  if (version != kVersion) {
    throw DataError("embedding store: unsupported version " +
                    std::to_string(version));
  }
  const uint32_t dim = r.U32();
  const uint32_t count = r.U32();
  EmbeddingStore store;
  for (uint32_t i = 0; i < count; ++i) {
    const std::string where = "embedding store: truncated at record " +
                              std::to_string(i);
    if (!r.Has(4)) throw DataError(where);
    const uint32_t key_len = r.U32();
    if (!r.Has(key_len) || r.remaining() - key_len < 4ULL * dim) {
      throw DataError(where);
    }
    std::string key = r.Str(key_len);
    std::vector<float> values(dim);
    for (auto& v : values) v = r.F32();
    store.Insert(std::move(key), Embedding::FromNormalized(std::move(values)));
  }
  if (r.remaining() != 0) {
    throw DataError("embedding store: " + std::to_string(r.remaining()) +
                    " trailing bytes after " + std::to_string(count) +
                    " records");
  }
  store.dim_ = dim;
  return store;
}

void EmbeddingStore::Save(const std::filesystem::path& path) const {
  const auto bytes = Serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

EmbeddingStore EmbeddingStore::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return Deserialize(bytes);
}

Embedding StubEmbedder::Embed(std::string_view, const ImageBuf& image) const {
  FloatPlane gray(image.width(), image.height(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (image.channels() == 1) {
        gray.at(x, y, 0) = image.at(x, y, 0) / 255.0;
      } else {
        gray.at(x, y, 0) = (0.299 * image.at(x, y, 0) +
                            0.587 * image.at(x, y, 1) +
                            0.114 * image.at(x, y, 2)) / 255.0;
      }
    }
  }
  const FloatPlane small = ResizeBicubic(gray, 8, 8);
  auto px = small.data();
  double mean = 0.0;
  for (double v : px) mean += v;
  mean /= static_cast<double>(px.size());
  std::vector<double> centered(px.size());
  double sq = 0.0;
  for (size_t i = 0; i < px.size(); ++i) {
    centered[i] = px[i] - mean;
    sq += centered[i] * centered[i];
  }
  std::vector<float> out(px.size(), 0.0f);
  // Anything this flat is a constant image up to rounding.
  if (sq < 1e-20) {
    out[0] = 1.0f;
    return Embedding::FromNormalized(std::move(out));
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (size_t i = 0; i < px.size(); ++i) {
    out[i] = static_cast<float>(centered[i] * inv);
  }
  return Embedding::FromNormalized(std::move(out));
}

Embedding RandomEmbedder::Embed(std::string_view key, const ImageBuf&) const {
  CounterRng rng(Mix64(Fnv1a(key) ^ Mix64(salt_ + kGoldenGamma)));
  std::vector<float> v(dim_);
  for (float& x : v) x = static_cast<float>(rng.NextNormal());
  return Embedding::FromRaw(std::move(v));
}

}  // namespace degradekit
