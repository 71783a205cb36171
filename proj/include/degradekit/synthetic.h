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

// Procedural stand-ins for an aligned face dataset, for smoke tests and
// selftest. Images of one identity share a smooth random pattern; each
// image adds a small shift, gain and texture of its own.

#ifndef DEGRADEKIT_SYNTHETIC_H_
#define DEGRADEKIT_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>

#include "degradekit/image.h"
#include "degradekit/sweep.h"
#include "degradekit/verify.h"

namespace degradekit {

struct SyntheticOptions {
  int identities = 20;
  int images_per_identity = 4;
  int folds = 2;
  // Matched pairs per fold; the same number of mismatched pairs is added.
  int pairs_per_fold = 20;
  int image_size = 112;
  uint64_t seed = 1;
};

std::string SyntheticName(int identity);
ImageBuf MakeSyntheticFace(const SyntheticOptions& opts, int identity, int image);

// Identities are split evenly across folds. Throws InvalidArgument when the
// options cannot supply enough distinct matched pairs.
PairSet MakeSyntheticPairs(const SyntheticOptions& opts);

// Writes <dir>/pairs.txt and <dir>/images/<Name>/<Name>_NNNN.png for every
// image referenced by the pairs.
void WriteSyntheticDataset(const SyntheticOptions& opts,
                           const std::filesystem::path& dir);

// Two values per axis, None plus one active value; the active value is the
// extreme one on jpeg, downscale and exposure.
ParamGrid MiniatureGrid();

}  // namespace degradekit

#endif  // DEGRADEKIT_SYNTHETIC_H_
