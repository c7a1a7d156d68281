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

#ifndef DHCN_DATASET_H_
#define DHCN_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dhcn/context_graph.h"
#include "dhcn/matrix.h"
#include "dhcn/svm.h"

namespace dhcn {

struct ImageRecord {
  std::string id;
  Matrix features;  // cells x feature_dim, row-major grid order
  std::vector<std::string> labels;
  std::vector<std::string> semantic_links;  // ids of linked images
};

struct Dataset {
  GridSpec grid;
  std::size_t feature_dim = 0;
  bool features_are_histograms = false;
  std::vector<std::string> concepts;
  std::vector<ImageRecord> images;

  std::size_t size() const { return images.size(); }
  std::vector<std::string> Ids() const;
  std::vector<Matrix> Features() const;
  BoolMatrix Truth() const;
  LabelMatrix Labels() const { return LabelMatrix::FromTruth(Truth()); }
  bool HasSemanticLinks() const;
  std::vector<std::pair<std::string, std::string>> LinkPairs() const;
};

// Checks the manifest invariants: unique ids, declared concepts, feature
// shapes, nonnegative histograms.
void ValidateDataset(const Dataset& dataset);

// Reads a delimited numeric file (one cell per line, whitespace or comma
// separated; blank lines and '#' comments skipped).
Matrix ReadFeatureFile(const std::filesystem::path& path,
                       std::size_t expected_rows, std::size_t expected_cols);
void WriteFeatureFile(const std::filesystem::path& path, const Matrix& features);

// Parses the JSON manifest and every feature file it references. Feature
// paths are resolved relative to the manifest's directory.
Dataset LoadDataset(const std::filesystem::path& manifest_path);

// Writes `<dir>/<manifest_name>` plus one feature file per image.
void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir,
                 const std::string& manifest_name = "manifest.json");

}  // namespace dhcn

#endif  // DHCN_DATASET_H_
