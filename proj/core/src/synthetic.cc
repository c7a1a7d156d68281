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

#include "dhcn/synthetic.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dhcn/error.h"

namespace dhcn {
namespace {

// Whether `cell` lies in the target half of concept k.
bool InTargetHalf(const GridSpec& grid, std::size_t cell, std::size_t concept_index) {
  const std::size_t r = cell / grid.cols;
  const std::size_t c = cell % grid.cols;
  switch (concept_index % 4) {
    case 0:
      return 2 * r < grid.rows;
    case 1:
      return 2 * r >= grid.rows;
    case 2:
      return 2 * c < grid.cols;
    default:
      return 2 * c >= grid.cols;
  }
}

}  // namespace

Dataset MakePlantedDataset(const SyntheticOptions& options) {
  ValidateGrid(options.grid);
  if (options.num_concepts == 0 || options.num_scenes == 0) {
    throw ValidationError("synthetic: need at least one concept and one scene");
  }
  if (options.grid.rows < 2 || options.grid.cols < 2) {
    throw ValidationError("synthetic: grid must be at least 2x2");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t k_count = options.num_concepts;
  const std::size_t bg0 = k_count;  // two background dimensions follow the objects
  Dataset ds;
  ds.grid = options.grid;
  ds.feature_dim = k_count + 2;
  ds.features_are_histograms = false;
  for (std::size_t k = 0; k < k_count; ++k) ds.concepts.push_back("concept" + std::to_string(k));

  // Scene label sets; every scene gets at least one label.
  std::vector<std::vector<bool>> scene_labels(options.num_scenes,
                                              std::vector<bool>(k_count));
  for (auto& labels : scene_labels) {
    bool any = false;
    for (std::size_t k = 0; k < k_count; ++k) {
      labels[k] = unit(rng) < 0.5;
      any = any || labels[k];
    }
    if (!any) labels[static_cast<std::size_t>(unit(rng) * k_count) % k_count] = true;
  }

  const std::size_t n = options.grid.cells();
  const auto random_cell = [&](std::size_t k, bool target) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < n; ++i)
      if (InTargetHalf(options.grid, i, k) == target) cells.push_back(i);
    return cells[static_cast<std::size_t>(unit(rng) * static_cast<double>(cells.size())) %
                 cells.size()];
  };

  for (std::size_t p = 0; p < options.num_images; ++p) {
    const std::size_t scene =
        static_cast<std::size_t>(unit(rng) * static_cast<double>(options.num_scenes)) %
        options.num_scenes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(scene) /
                         static_cast<double>(options.num_scenes);
    ImageRecord rec;
    rec.id = options.id_prefix + std::to_string(p);
    rec.features = Matrix(n, ds.feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = rec.features.row(i);
      for (std::size_t k = 0; k < k_count; ++k) row[k] = options.cell_noise * unit(rng);
      row[bg0] = options.background_scale * std::cos(angle) + options.cell_noise * normal(rng);
      row[bg0 + 1] = options.background_scale * std::sin(angle) + options.cell_noise * normal(rng);
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      bool present = scene_labels[scene][k];
      if (unit(rng) < options.label_flip_rate) present = !present;
      if (present) rec.labels.push_back(ds.concepts[k]);
      const double draw = unit(rng);
      if (present && draw < options.object_visibility) {
        rec.features(random_cell(k, true), k) += 1.0;
      } else if (!present && draw < options.distractor_rate) {
        rec.features(random_cell(k, false), k) += 1.0;
      }
    }
    ds.images.push_back(std::move(rec));
  }
  return ds;
}

void SplitDataset(const Dataset& all, std::size_t train_count, Dataset& train,
                  Dataset& test) {
  if (train_count > all.size()) {
    throw ValidationError("split: train_count exceeds dataset size");
  }
  train = all;
  test = all;
  train.images.assign(all.images.begin(),
                      all.images.begin() + static_cast<std::ptrdiff_t>(train_count));
  test.images.assign(all.images.begin() + static_cast<std::ptrdiff_t>(train_count),
                     all.images.end());
}

}  // namespace dhcn
