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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "degradekit/embed.h"
#include "degradekit/error.h"
#include "degradekit/image.h"
#include "degradekit/rng.h"
#include "httplib.h"

namespace degradekit {
namespace {

ImageBuf RandomImage(int w, int h, uint64_t seed, int max_value = 255) {
  CounterRng rng(seed);
  ImageBuf img(w, h, 3);
  for (uint8_t& v : img.data()) {
    v = static_cast<uint8_t>(rng.NextU64() % (max_value + 1));
  }
  return img;
}

TEST(EmbeddingTest, FromRawNormalizes) {
  const Embedding e = Embedding::FromRaw({3, 4});
  EXPECT_NEAR(e.Norm(), 1.0, 1e-6);
  EXPECT_FLOAT_EQ(e.values()[0], 0.6f);
  EXPECT_FLOAT_EQ(e.values()[1], 0.8f);
  EXPECT_THROW(Embedding::FromRaw({}), DataError);
  EXPECT_THROW(Embedding::FromRaw({0, 0, 0}), DataError);
  EXPECT_THROW(Embedding::FromRaw({1, std::numeric_limits<float>::quiet_NaN()}),
               DataError);
}

TEST(EmbeddingTest, LargeAndTinyVectorsNormalize) {
  CounterRng rng(2);
  for (double scale : {1e-20, 1e-3, 1.0, 1e6, 1e30}) {
    std::vector<float> v(512);
    for (float& x : v) x = static_cast<float>(rng.NextNormal() * scale);
    EXPECT_NEAR(Embedding::FromRaw(v).Norm(), 1.0, 1e-5) << scale;
  }
}

TEST(EmbeddingTest, CosineNeedsEqualDims) {
  const Embedding a = Embedding::FromRaw({1, 0});
  const Embedding b = Embedding::FromRaw({0, 1, 0});
  EXPECT_THROW(CosineSimilarity(a, b), DimMismatchError);
  EXPECT_DOUBLE_EQ(CosineSimilarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(CosineSimilarity(a, Embedding::FromRaw({0, 2})), 0.0);
}

TEST(KeyTest, Format) {
  EXPECT_EQ(CleanKey("Aaron/Aaron_0001"), "Aaron/Aaron_0001@clean");
  EXPECT_EQ(DegradedKey("Aaron/Aaron_0001", 42, 3), "Aaron/Aaron_0001@c42r3");
}

TEST(StubTest, IdenticalImagesScoreOne) {
  StubEmbedder stub;
  const ImageBuf img = RandomImage(40, 30, 1);
  EXPECT_NEAR(CosineSimilarity(stub.Embed(img), stub.Embed(img)), 1.0, 1e-6);
  EXPECT_NEAR(stub.Embed(img).Norm(), 1.0, 1e-6);
  EXPECT_EQ(stub.Embed(img).dim(), 64u);
}

TEST(StubTest, ComplementScoresMinusOne) {
  StubEmbedder stub;
  const ImageBuf img = RandomImage(33, 47, 4);
  ImageBuf inv = img;
  for (uint8_t& v : inv.data()) v = static_cast<uint8_t>(255 - v);
  EXPECT_NEAR(CosineSimilarity(stub.Embed(img), stub.Embed(inv)), -1.0, 1e-6);
}

TEST(StubTest, ConstantImageFallsBackToFirstBasisVector) {
  StubEmbedder stub;
  ImageBuf flat(20, 20, 3);
  for (uint8_t& v : flat.data()) v = 93;
  const Embedding e = stub.Embed(flat);
  ASSERT_EQ(e.dim(), 64u);
  EXPECT_EQ(e.values()[0], 1.0f);
  for (size_t i = 1; i < 64; ++i) EXPECT_EQ(e.values()[i], 0.0f);
}

TEST(StubTest, BrightnessShiftLeavesScoresUnchanged) {
  StubEmbedder stub;
  const ImageBuf a = RandomImage(50, 50, 7, 200);
  const ImageBuf b = RandomImage(50, 50, 8, 200);
  auto shifted = [](ImageBuf img, int d) {
    for (uint8_t& v : img.data()) v = static_cast<uint8_t>(v + d);
    return img;
  };
  const double base = CosineSimilarity(stub.Embed(a), stub.Embed(b));
  for (int d : {10, 55}) {
    const double s = CosineSimilarity(stub.Embed(shifted(a, d)),
                                      stub.Embed(shifted(b, d)));
    EXPECT_NEAR(s, base, 1e-6) << d;
  }
}

TEST(RandomTest, KeyedAndDeterministic) {
  RandomEmbedder r(96, 5);
  EXPECT_FALSE(r.needs_pixels());
  const Embedding a = r.Embed("x@clean", {});
  EXPECT_EQ(a.dim(), 96u);
  EXPECT_NEAR(a.Norm(), 1.0, 1e-5);
  EXPECT_EQ(a, r.Embed("x@clean", {}));
  EXPECT_NE(a, r.Embed("x@c1r0", {}));
  EXPECT_NE(a, RandomEmbedder(96, 6).Embed("x@clean", {}));
}

Embedding Unit(size_t dim, uint64_t seed) {
  CounterRng rng(seed);
  std::vector<float> v(dim);
  for (float& x : v) x = static_cast<float>(rng.NextNormal());
  return Embedding::FromRaw(v);
}

TEST(StoreTest, InsertAndLookup) {
  EmbeddingStore s;
  s.Insert("a", Unit(8, 1));
  s.Insert("b", Unit(8, 2));
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.dim(), 8u);
  EXPECT_EQ(s.At("b"), Unit(8, 2));
  EXPECT_TRUE(s.Contains("a"));
  EXPECT_FALSE(s.Contains("c"));
  EXPECT_THROW(s.At("c"), MissingKeyError);
  EXPECT_THROW(s.Insert("a", Unit(8, 3)), DataError);
  try {
    s.Insert("z", Unit(16, 1));
    FAIL() << "expected DimMismatchError";
  } catch (const DimMismatchError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("8"), std::string::npos) << what;
    EXPECT_NE(what.find("16"), std::string::npos) << what;
  }
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

TEST(StoreTest, BinaryLayoutIsExact) {
  EmbeddingStore s;
  const Embedding e = Embedding::FromRaw({3, 4});
  s.Insert("k1", e);
  std::vector<uint8_t> want = {'D', 'K', 'E', 'S'};
  PutU32(want, 1);  // version
  PutU32(want, 2);  // dim
  PutU32(want, 1);  // count
  PutU32(want, 2);
  want.push_back('k');
  want.push_back('1');
  for (float f : e.values()) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    PutU32(want, bits);
  }
  EXPECT_EQ(s.Serialize(), want);
}

TEST(StoreTest, SaveLoadSaveIsByteIdentical) {
  EmbeddingStore s;
  for (int i = 0; i < 20; ++i) s.Insert("img" + std::to_string(i), Unit(33, i));
  const auto path = std::filesystem::temp_directory_path() / "dk_store_rt.dkes";
  s.Save(path);
  const EmbeddingStore back = EmbeddingStore::Load(path);
  EXPECT_EQ(back.keys(), s.keys());
  EXPECT_EQ(back.Serialize(), s.Serialize());
  std::filesystem::remove(path);
}

TEST(StoreTest, EmptyStoreRoundTrips) {
  const EmbeddingStore empty;
  const auto bytes = empty.Serialize();
  EXPECT_EQ(bytes.size(), 16u);
  EXPECT_EQ(EmbeddingStore::Deserialize(bytes).Serialize(), bytes);
}

TEST(StoreTest, CorruptionIsReported) {
  EmbeddingStore s;
  for (int i = 0; i < 3; ++i) s.Insert("key" + std::to_string(i), Unit(4, i));
  const auto good = s.Serialize();

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(EmbeddingStore::Deserialize(bad_magic), DataError);

  auto bad_version = good;
  bad_version[4] = 9;
  try {
    EmbeddingStore::Deserialize(bad_version);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  // Record layout: 16-byte header, then (4 + 4 + 16) bytes per record.
  auto bad_len = good;
  bad_len[16 + 2 * 24] = 200;  // key length of record 2
  try {
    EmbeddingStore::Deserialize(bad_len);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos)
        << e.what();
  }

  auto cut = good;
  cut.resize(good.size() - 3);
  EXPECT_THROW(EmbeddingStore::Deserialize(cut), DataError);

  auto extra = good;
  extra.push_back(0);
  EXPECT_THROW(EmbeddingStore::Deserialize(extra), DataError);

  EXPECT_THROW(EmbeddingStore::Load("/nonexistent/x.dkes"), IoError);
}

TEST(StoreEmbedderTest, LooksUpByKey) {
  EmbeddingStore s;
  s.Insert("a@clean", Unit(4, 1));
  StoreEmbedder p(s);
  EXPECT_FALSE(p.needs_pixels());
  EXPECT_EQ(p.Embed("a@clean", {}), Unit(4, 1));
  EXPECT_THROW(p.Embed("a@c0r0", {}), MissingKeyError);
}

// Local embedding service for the HTTP client tests.
class FakeService {
 public:
  FakeService() {
    server_.Post("/embed", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      Record(req);
      res.set_content(R"({"dim": 4, "values": [3, 0, 4, 0]})",
                      "application/json");
    });
    server_.Post("/grow", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      const int n = Record(req);
      res.set_content(n == 1 ? R"({"dim": 2, "values": [1, 1]})"
                             : R"({"dim": 3, "values": [1, 1, 1]})",
                      "application/json");
    });
    server_.Post("/fail", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      Record(req);
      res.status = 503;
      res.set_content("overloaded", "text/plain");
    });
    server_.Post("/slow", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      Record(req);
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content(R"({"dim": 1, "values": [1]})", "application/json");
    });
    server_.Post("/garbage", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      Record(req);
      res.set_content("{\"dim\": 2, \"values\": [1]}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string Url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int calls() const { return calls_.load(); }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() const {
    std::lock_guard lock(mu_);
    return auth_;
  }
  std::vector<std::string> types() const {
    std::lock_guard lock(mu_);
    return types_;
  }

 private:
  int Record(const httplib::Request& req) {
    std::lock_guard lock(mu_);
    bodies_.push_back(req.body);
    auth_.push_back(req.get_header_value("Authorization"));
    types_.push_back(req.get_header_value("Content-Type"));
    return ++calls_;
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> calls_{0};
  mutable std::mutex mu_;
  std::vector<std::string> bodies_, auth_, types_;
};

RemoteOptions Options(const std::string& url) {
  RemoteOptions o;
  o.endpoint = url;
  o.timeout_seconds = 5;
  o.retries = 2;
  o.backoff_ms = 1;
  return o;
}

TEST(RemoteTest, NormalizesResponse) {
  FakeService svc;
  RemoteEmbedder r(Options(svc.Url("/embed")));
  const Embedding e = r.Embed("k", RandomImage(8, 8, 1));
  EXPECT_NEAR(e.Norm(), 1.0, 1e-5);
  EXPECT_FLOAT_EQ(e.values()[0], 0.6f);
  EXPECT_FLOAT_EQ(e.values()[2], 0.8f);
}

TEST(RemoteTest, IdenticalImagesGiveIdenticalPayloads) {
  FakeService svc;
  RemoteOptions o = Options(svc.Url("/embed"));
  o.token = "sekrit";
  RemoteEmbedder r(o);
  const ImageBuf img = RandomImage(12, 9, 3);
  r.Embed("a", img);
  r.Embed("b", img);
  const auto bodies = svc.bodies();
  ASSERT_EQ(bodies.size(), 2u);
  EXPECT_EQ(bodies[0], bodies[1]);
  // The body is the PNG encoding of the image.
  const std::vector<uint8_t> bytes(bodies[0].begin(), bodies[0].end());
  EXPECT_EQ(DecodePng(bytes), img);
  EXPECT_EQ(svc.auth()[0], "Bearer sekrit");
  EXPECT_EQ(svc.types()[0], "image/png");
}

TEST(RemoteTest, DimensionChangeIsAnError) {
  FakeService svc;
  RemoteEmbedder r(Options(svc.Url("/grow")));
  EXPECT_EQ(r.Embed("a", RandomImage(4, 4, 1)).dim(), 2u);
  try {
    r.Embed("b", RandomImage(4, 4, 1));
    FAIL() << "expected DimMismatchError";
  } catch (const DimMismatchError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find('2'), std::string::npos) << what;
    EXPECT_NE(what.find('3'), std::string::npos) << what;
  }

  RemoteOptions o = Options(svc.Url("/embed"));
  o.expected_dim = 512;
  EXPECT_THROW(RemoteEmbedder(o).Embed("c", RandomImage(4, 4, 1)),
               DimMismatchError);
}

TEST(RemoteTest, HttpStatusIsNotRetried) {
  FakeService svc;
  RemoteEmbedder r(Options(svc.Url("/fail")));
  try {
    r.Embed("a", RandomImage(4, 4, 1));
    FAIL() << "expected RemoteStatusError";
  } catch (const RemoteStatusError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(svc.calls(), 1);
}

TEST(RemoteTest, TimeoutIsRetriedThenReported) {
  FakeService svc;
  RemoteOptions o = Options(svc.Url("/slow"));
  o.timeout_seconds = 0.15;
  o.retries = 1;
  RemoteEmbedder r(o);
  EXPECT_THROW(r.Embed("a", RandomImage(4, 4, 1)), RemoteTimeoutError);
  EXPECT_EQ(svc.calls(), 2);
}

TEST(RemoteTest, ConnectionFailureIsRemoteError) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteOptions o = Options("http://127.0.0.1:" + std::to_string(port) + "/embed");
  o.retries = 2;
  o.timeout_seconds = 0.3;
  try {
    RemoteEmbedder(o).Embed("a", RandomImage(4, 4, 1));
    FAIL() << "expected RemoteError";
  } catch (const RemoteStatusError&) {
    FAIL() << "transport failure reported as HTTP status";
  } catch (const RemoteError& e) {
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos)
        << e.what();
  }
}

TEST(RemoteTest, MalformedResponse) {
  FakeService svc;
  EXPECT_THROW(RemoteEmbedder(Options(svc.Url("/garbage")))
                   .Embed("a", RandomImage(4, 4, 1)),
               RemoteError);
}

TEST(RemoteTest, RejectsBadEndpoint) {
  EXPECT_THROW(RemoteEmbedder(Options("ftp://x/embed")), InvalidArgument);
  EXPECT_THROW(RemoteEmbedder(Options("localhost:80")), InvalidArgument);
}

}  // namespace
}  // namespace degradekit
