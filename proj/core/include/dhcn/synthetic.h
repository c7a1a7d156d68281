// Copyright 2026 The DHCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DHCN_SYNTHETIC_H_
#define DHCN_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "dhcn/dataset.h"

namespace dhcn {

// Generator for datasets whose labels have planted geometric and semantic
// structure.
//
// Every image belongs to a scene. Scenes sit on a circle in a 2-d background
// subspace and each owns a random label set, so scene-to-label maps are not
// linearly decodable from the background alone. Concept k owns feature
// dimension k and a target half of the grid (top, bottom, left, right for
// k mod 4). A present concept shows its object in the target half with
// probability `object_visibility`; an absent concept shows a distractor
// object in the opposite half with probability `distractor_rate`. Counting
// objects is therefore ambiguous, where they sit is informative, and images
// of the same scene share labels.
struct SyntheticOptions {
  std::size_t num_images = 120;
  GridSpec grid{4, 4};
  std::size_t num_concepts = 4;
  std::size_t num_scenes = 8;
  double object_visibility = 0.6;
  double distractor_rate = 0.4;
  double label_flip_rate = 0.0;
  double background_scale = 1.0;
  double cell_noise = 0.1;
  std::uint64_t seed = 0;
  std::string id_prefix = "img";
};

Dataset MakePlantedDataset(const SyntheticOptions& options);

// Splits the first `train_count` images off into `train`, the rest into `test`.
void SplitDataset(const Dataset& all, std::size_t train_count, Dataset& train,
                  Dataset& test);

}  // namespace dhcn

#endif  // DHCN_SYNTHETIC_H_
