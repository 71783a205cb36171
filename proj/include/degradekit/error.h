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

#ifndef DEGRADEKIT_ERROR_H_
#define DEGRADEKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace degradekit {

// Bad arguments to an operation (invalid parameters, wrong shapes).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent data read from disk or produced by a peer:
// bad file formats, missing embeddings, incomplete result sets.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

// Lookup of an embedding key that is not in the store.
class MissingKeyError : public DataError {
 public:
  explicit MissingKeyError(const std::string& key)
      : DataError("missing embedding for key '" + key + "'"), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class DimMismatchError : public DataError {
 public:
  DimMismatchError(size_t expected, size_t got)
      : DataError("embedding dim mismatch: store has " +
                  std::to_string(expected) + ", got " + std::to_string(got)),
        expected_(expected),
        got_(got) {}
  size_t expected() const { return expected_; }
  size_t got() const { return got_; }

 private:
  size_t expected_;
  size_t got_;
};

// Failures talking to a remote embedding service.
class RemoteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RemoteTimeoutError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

class RemoteStatusError : public RemoteError {
 public:
  RemoteStatusError(int status, const std::string& body)
      : RemoteError("embedding service returned HTTP " +
                    std::to_string(status) + ": " + body),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace degradekit

#endif  // DEGRADEKIT_ERROR_H_
