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

#include "dhcn/model.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dhcn/error.h"
#include "dhcn/linalg.h"

namespace dhcn {

std::string_view TrainingModeName(TrainingMode mode) {
  switch (mode) {
    case TrainingMode::kCF:
      return "cf";
    case TrainingMode::kDFCN:
      return "dfcn";
    case TrainingMode::kDLCN:
      return "dlcn";
    case TrainingMode::kDHCN:
      return "dhcn";
  }
  return "?";
}

TrainingMode ParseTrainingMode(std::string_view name) {
  for (TrainingMode m : {TrainingMode::kCF, TrainingMode::kDFCN,
                         TrainingMode::kDLCN, TrainingMode::kDHCN}) {
    if (TrainingModeName(m) == name) return m;
  }
  throw ValidationError("unknown mode '" + std::string(name) +
                        "' (expected cf, dfcn, dlcn or dhcn)");
}

DepthConfig EffectiveDepth(TrainingMode mode, const DepthConfig& requested) {
  DepthConfig depth = requested;
  if (mode == TrainingMode::kCF) depth.geo_layers = 0;
  if (mode != TrainingMode::kDHCN) depth.sem_layers = 0;
  return depth;
}

Matrix FinalMaps(const DhcnModel& model, std::span<const ImageRecord> images) {
  const std::size_t q = images.size();
  const std::size_t width =
      GeometricWidth(model.reference.initial_pooled.cols(),
                     model.contexts.num_directions(), model.depth.geo_layers);
  Matrix initial_pooled(q, model.reference.initial_pooled.cols());
  Matrix pooled(q, width);
  for (std::size_t i = 0; i < q; ++i) {
    if (images[i].features.rows() != model.grid.cells()) {
      throw ValidationError("image '" + images[i].id + "' has " +
                            std::to_string(images[i].features.rows()) +
                            " cells, model expects " +
                            std::to_string(model.grid.cells()));
    }
    const Matrix phi0 = ApplyInitialMap(model.initial_map, images[i].features);
    if (phi0.cols() != initial_pooled.cols()) {
      throw ValidationError("image '" + images[i].id + "' maps to width " +
                            std::to_string(phi0.cols()) + ", model expects " +
                            std::to_string(initial_pooled.cols()));
    }
    const std::vector<double> init = Pool(phi0);
    std::copy(init.begin(), init.end(), initial_pooled.row(i).begin());
    const std::vector<double> v =
        Pool(ForwardGeometric(phi0, model.contexts, model.depth).back());
    std::copy(v.begin(), v.end(), pooled.row(i).begin());
  }
  if (model.depth.sem_layers == 0) return pooled;

  const SemanticReference& ref = model.reference;
  const std::size_t last = model.depth.sem_layers - 1;
  const std::vector<Matrix> ref_layers =
      ForwardSemantic(ref.pooled, model.contexts, model.depth);
  std::unordered_map<std::string, std::size_t> ref_index;
  for (std::size_t j = 0; j < ref.image_ids.size(); ++j)
    ref_index.emplace(ref.image_ids[j], j);

  Matrix attach(q, ref.image_ids.size());
  for (std::size_t i = 0; i < q; ++i) {
    auto row = attach.row(i);
    if (auto it = ref_index.find(images[i].id); it != ref_index.end()) {
      auto learned = model.contexts.semantic[last].row(it->second);
      std::copy(learned.begin(), learned.end(), row.begin());
      continue;
    }
    std::vector<std::size_t> neighbours;
    for (const std::string& link : images[i].semantic_links)
      if (auto it = ref_index.find(link); it != ref_index.end())
        neighbours.push_back(it->second);
    std::sort(neighbours.begin(), neighbours.end());
    neighbours.erase(std::unique(neighbours.begin(), neighbours.end()),
                     neighbours.end());
    if (neighbours.empty()) {
      neighbours = NearestRows(initial_pooled.row(i), ref.initial_pooled,
                               ref.k_neighbors, ref.similarity);
    }
    for (std::size_t j : neighbours)
      row[j] = 1.0 / static_cast<double>(neighbours.size());
  }
  const Matrix blocks[] = {
      pooled, Scale(MatMul(attach, ref_layers[last]), std::sqrt(model.depth.gamma2))};
  return HConcat(blocks);
}

Matrix PredictScores(const DhcnModel& model, std::span<const ImageRecord> images) {
  if (images.empty()) return Matrix(0, model.svm.num_classes());
  return Score(model.svm, FinalMaps(model, images));
}

}  // namespace dhcn
