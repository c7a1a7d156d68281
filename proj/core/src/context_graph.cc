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

#include "dhcn/context_graph.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dhcn/error.h"
#include "dhcn/linalg.h"

namespace dhcn {
namespace {

bool InSector(long drow, long dcol, Direction d) {
  const bool horizontal = std::labs(dcol) >= std::labs(drow) && dcol != 0;
  switch (d) {
    case Direction::kLeft:
      return horizontal && dcol < 0;
    case Direction::kRight:
      return horizontal && dcol > 0;
    case Direction::kTop:
      return !horizontal && drow < 0;
    case Direction::kBottom:
      return !horizontal && drow > 0;
  }
  return false;
}

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

}  // namespace

void ValidateGrid(const GridSpec& grid) {
  if (grid.rows < 1 || grid.cols < 1) {
    throw ValidationError("grid must have at least one row and column, got " +
                          std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols));
  }
}

std::string_view DirectionName(Direction d) {
  switch (d) {
    case Direction::kTop:
      return "top";
    case Direction::kBottom:
      return "bottom";
    case Direction::kLeft:
      return "left";
    case Direction::kRight:
      return "right";
  }
  return "?";
}

Direction ParseDirection(std::string_view name) {
  for (Direction d : kAllDirections)
    if (DirectionName(d) == name) return d;
  throw ValidationError("unknown direction '" + std::string(name) +
                        "' (expected top, bottom, left or right)");
}

Matrix BuildGeometricAdjacency(const GridSpec& grid, double radius,
                               Direction direction) {
  ValidateGrid(grid);
  if (!(radius >= 1.0)) {
    throw ValidationError("radius must be >= 1, got " + std::to_string(radius));
  }
  const std::size_t n = grid.cells();
  Matrix support(n, n);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    const long ri = static_cast<long>(i / grid.cols);
    const long ci = static_cast<long>(i % grid.cols);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const long drow = static_cast<long>(j / grid.cols) - ri;
      const long dcol = static_cast<long>(j % grid.cols) - ci;
      if (static_cast<double>(drow * drow + dcol * dcol) > r2) continue;
      if (InSector(drow, dcol, direction)) support(i, j) = 1.0;
    }
  }
  return support;
}

GeometricContext BuildGeometricContext(const GridSpec& grid, double radius) {
  GeometricContext ctx;
  ctx.grid = grid;
  ctx.radius = radius;
  for (Direction d : kAllDirections) {
    Matrix support = BuildGeometricAdjacency(grid, radius, d);
    ctx.masks.push_back(BoolMatrix::NonZeros(support));
    ctx.directions.push_back(RowNormalize(support));
  }
  return ctx;
}

std::string_view SimilarityName(Similarity s) {
  return s == Similarity::kCosine ? "cosine" : "dot";
}

Similarity ParseSimilarity(std::string_view name) {
  if (name == "cosine") return Similarity::kCosine;
  if (name == "dot") return Similarity::kDot;
  throw ValidationError("unknown similarity '" + std::string(name) + "'");
}

std::vector<std::size_t> NearestRows(std::span<const double> query,
                                     const Matrix& reference, std::size_t k,
                                     Similarity similarity,
                                     std::size_t exclude) {
  const double qnorm = Norm(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(reference.rows());
  for (std::size_t j = 0; j < reference.rows(); ++j) {
    if (j == exclude) continue;
    double s = Dot(query, reference.row(j));
    if (similarity == Similarity::kCosine) {
      const double rnorm = Norm(reference.row(j));
      if (qnorm > 0.0 && rnorm > 0.0) s /= qnorm * rnorm;
    }
    scored.emplace_back(s, j);
  }
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
  return out;
}

SemanticContext BuildSemanticAdjacency(const Matrix& pooled, std::size_t k,
                                       Similarity similarity) {
  const std::size_t p = pooled.rows();
  if (k < 1 || k >= p) {
    throw ValidationError("semantic k must satisfy 1 <= k < images (k=" +
                          std::to_string(k) + ", images=" + std::to_string(p) +
                          ")");
  }
  SemanticContext ctx{Matrix(p, p), BoolMatrix(p, p), k};
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j : NearestRows(pooled.row(i), pooled, k, similarity, i)) {
      ctx.mask.set(i, j, true);
      ctx.adjacency(i, j) = 1.0 / static_cast<double>(k);
    }
  }
  return ctx;
}

SemanticContext LoadSemanticLinks(
    std::span<const std::string> image_ids,
    std::span<const std::pair<std::string, std::string>> links) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < image_ids.size(); ++i) index.emplace(image_ids[i], i);
  const auto lookup = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) {
      throw ValidationError("semantic link references unknown image id '" +
                            id + "'");
    }
    return it->second;
  };
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [from, to] : links) edges.emplace(lookup(from), lookup(to));

  const std::size_t p = image_ids.size();
  SemanticContext ctx{Matrix(p, p), BoolMatrix(p, p), 0};
  for (const auto& [i, j] : edges) {
    ctx.mask.set(i, j, true);
    ctx.adjacency(i, j) = 1.0;
  }
  for (std::size_t i = 0; i < p; ++i)
    ctx.k_neighbors = std::max(ctx.k_neighbors, ctx.mask.CountRow(i));
  ctx.adjacency = RowNormalize(ctx.adjacency);
  return ctx;
}

Matrix RowNormalize(const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto row = out.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < 0.0) {
        throw ValidationError("row_normalize: negative entry at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      sum += row[j];
    }
    if (sum == 0.0) continue;
    for (double& v : row) v /= sum;
  }
  return out;
}

}  // namespace dhcn
