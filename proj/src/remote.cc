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

#include <chrono>
#include <string>
#include <thread>

#include "degradekit/embed.h"
#include "degradekit/error.h"
#include "httplib.h"
#include "json.hpp"

namespace degradekit {
namespace {

bool IsTimeout(httplib::Error err) {
  return err == httplib::Error::ConnectionTimeout ||
         err == httplib::Error::Read || err == httplib::Error::Write;
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteOptions options)
    : options_(std::move(options)), dim_(options_.expected_dim) {
  const std::string& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw InvalidArgument("endpoint must be an http:// URL, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/embed" : url.substr(path_start);
  if (options_.retries < 0) throw InvalidArgument("retries must be >= 0");
  if (!(options_.timeout_seconds > 0)) {
    throw InvalidArgument("timeout must be positive");
  }
}

std::vector<uint8_t> RemoteEmbedder::RequestBody(const ImageBuf& image) {
  return EncodePng(image);
}

Embedding RemoteEmbedder::Embed(std::string_view key,
                                const ImageBuf& image) const {
  const auto body = RequestBody(image);
  const std::string payload(body.begin(), body.end());

  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  const auto usec =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout).count();
  client.set_connection_timeout(usec / 1000000, usec % 1000000);
  client.set_read_timeout(usec / 1000000, usec % 1000000);
  client.set_write_timeout(usec / 1000000, usec % 1000000);
  httplib::Headers headers;
  if (!options_.token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.token);
  }

  httplib::Result res;
  for (int attempt = 0;; ++attempt) {
    res = client.Post(path_, headers, payload, "image/png");
    if (res) break;
    if (attempt >= options_.retries) {
      const std::string what = "embedding request for '" + std::string(key) +
                               "' failed after " + std::to_string(attempt + 1) +
                               " attempts: " + httplib::to_string(res.error());
      if (IsTimeout(res.error())) throw RemoteTimeoutError(what);
      throw RemoteError(what);
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(options_.backoff_ms << attempt));
  }
  if (res->status < 200 || res->status >= 300) {
    throw RemoteStatusError(res->status, res->body.substr(0, 200));
  }

  std::vector<float> values;
  try {
    const auto j = nlohmann::json::parse(res->body);
    const size_t dim = j.at("dim").get<size_t>();
    values = j.at("values").get<std::vector<float>>();
    if (values.size() != dim) {
      throw RemoteError("embedding service returned " +
                        std::to_string(values.size()) + " values but dim " +
                        std::to_string(dim));
    }
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(std::string("malformed embedding response: ") + e.what());
  }

  size_t expected = 0;
  if (!dim_.compare_exchange_strong(expected, values.size()) &&
      expected != values.size()) {
    throw DimMismatchError(expected, values.size());
  }
  try {
    return Embedding::FromRaw(std::move(values));
  } catch (const DataError& e) {
    throw RemoteError(std::string("unusable embedding from service: ") +
                      e.what());
  }
}

}  // namespace degradekit
