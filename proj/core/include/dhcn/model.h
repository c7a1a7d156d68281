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

#ifndef DHCN_MODEL_H_
#define DHCN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dhcn/context_graph.h"
#include "dhcn/dataset.h"
#include "dhcn/feature_maps.h"
#include "dhcn/matrix.h"
#include "dhcn/network.h"
#include "dhcn/svm.h"

namespace dhcn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Ablation ladder: context-free, fixed geometric contexts, learned geometric
// contexts, learned geometric and semantic contexts.
enum class TrainingMode { kCF, kDFCN, kDLCN, kDHCN };

std::string_view TrainingModeName(TrainingMode mode);
TrainingMode ParseTrainingMode(std::string_view name);

// Depth actually unfolded for `mode`: CF drops every context layer, DFCN and
// DLCN drop the semantic level.
DepthConfig EffectiveDepth(TrainingMode mode, const DepthConfig& requested);

// The training images the semantic level is anchored to. New images attach to
// them through their links or nearest neighbours.
struct SemanticReference {
  std::vector<std::string> image_ids;
  Matrix initial_pooled;  // pooled input maps, searched for neighbours
  Matrix pooled;          // pooled maps under the trained geometric contexts
  Similarity similarity = Similarity::kCosine;
  std::size_t k_neighbors = 0;

  bool operator==(const SemanticReference&) const = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> flags;
  double final_objective = 0.0;
  std::size_t best_iteration = 0;

  bool operator==(const Provenance&) const = default;
};

struct DhcnModel {
  std::uint32_t format_version = kModelFormatVersion;
  TrainingMode mode = TrainingMode::kDHCN;
  DepthConfig depth;  // effective depth
  GridSpec grid;
  double radius = 1.0;
  std::vector<std::string> concepts;
  InitialMapSpec initial_map;
  PerLayerContexts contexts;
  SemanticReference reference;
  SvmModel svm;
  Provenance provenance;

  bool operator==(const DhcnModel&) const = default;
};

// Final maps of `images` under `model`. Images whose id belongs to the
// reference set use their trained semantic rows; others attach uniformly to
// their linked reference images, or to their k nearest reference images when
// no link resolves.
Matrix FinalMaps(const DhcnModel& model, std::span<const ImageRecord> images);

// P x K SVM scores.
Matrix PredictScores(const DhcnModel& model, std::span<const ImageRecord> images);

}  // namespace dhcn

#endif  // DHCN_MODEL_H_
