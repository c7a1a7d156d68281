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

#ifndef DHCN_CONTEXT_GRAPH_H_
#define DHCN_CONTEXT_GRAPH_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dhcn/matrix.h"

namespace dhcn {

// Regular grid of non-overlapping cells. Cell index = row * cols + col.
struct GridSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t cells() const { return rows * cols; }
  bool operator==(const GridSpec&) const = default;
};

void ValidateGrid(const GridSpec& grid);

enum class Direction { kTop, kBottom, kLeft, kRight };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::kTop, Direction::kBottom, Direction::kLeft, Direction::kRight};

std::string_view DirectionName(Direction d);
Direction ParseDirection(std::string_view name);

// 0/1 support of cell j relative to cell i: j lies within `radius` (cell
// units, centre to centre), j != i, and j falls in the sector `direction`.
// Sectors: horizontal when |dcol| >= |drow| (ties go horizontal), vertical
// otherwise. Right/bottom are the positive offsets.
Matrix BuildGeometricAdjacency(const GridSpec& grid, double radius,
                               Direction direction);

// The four directional systems, row-stochastic, with their supports.
struct GeometricContext {
  GridSpec grid;
  double radius = 1.0;
  std::vector<Matrix> directions;  // ordered as kAllDirections
  std::vector<BoolMatrix> masks;

  bool operator==(const GeometricContext&) const = default;
};

GeometricContext BuildGeometricContext(const GridSpec& grid, double radius);

enum class Similarity { kCosine, kDot };

std::string_view SimilarityName(Similarity s);
Similarity ParseSimilarity(std::string_view name);

// Image-level adjacency with a frozen support.
struct SemanticContext {
  Matrix adjacency;
  BoolMatrix mask;
  std::size_t k_neighbors = 0;

  bool operator==(const SemanticContext&) const = default;
};

// Indices of the k rows of `reference` most similar to `query`, best first.
// Ties go to the lower index. `exclude` (if < reference.rows()) is skipped.
// Cosine falls back to the dot product when either vector has zero norm.
std::vector<std::size_t> NearestRows(std::span<const double> query,
                                     const Matrix& reference, std::size_t k,
                                     Similarity similarity,
                                     std::size_t exclude = static_cast<std::size_t>(-1));

// kNN graph over the rows of `pooled` (self excluded) with uniform 1/k weights.
SemanticContext BuildSemanticAdjacency(const Matrix& pooled, std::size_t k,
                                       Similarity similarity);

// Directed links between image ids. Duplicates are dropped; each row with
// links gets uniform weights.
SemanticContext LoadSemanticLinks(
    std::span<const std::string> image_ids,
    std::span<const std::pair<std::string, std::string>> links);

// Divides every nonzero row by its sum. Negative entries are rejected.
Matrix RowNormalize(const Matrix& a);

}  // namespace dhcn

#endif  // DHCN_CONTEXT_GRAPH_H_
