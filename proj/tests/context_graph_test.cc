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

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"

namespace dhcn {
namespace {

std::set<std::pair<std::size_t, std::size_t>> Support(const Matrix& m) {
  std::set<std::pair<std::size_t, std::size_t>> s;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) s.insert({i, j});
  return s;
}

using Pairs = std::set<std::pair<std::size_t, std::size_t>>;

TEST(GeometricAdjacencyTest, TwoByTwoRight) {
  const Matrix p = BuildGeometricAdjacency({2, 2}, 1.0, Direction::kRight);
  EXPECT_EQ(Support(p), (Pairs{{0, 1}, {2, 3}}));
}

TEST(GeometricAdjacencyTest, TwoByTwoTop) {
  const Matrix p = BuildGeometricAdjacency({2, 2}, 1.0, Direction::kTop);
  EXPECT_EQ(Support(p), (Pairs{{2, 0}, {3, 1}}));
}

TEST(GeometricAdjacencyTest, DiagonalTiesGoHorizontal) {
  const Matrix p = BuildGeometricAdjacency({3, 3}, 2.0, Direction::kRight);
  std::set<std::size_t> row0;
  for (std::size_t j = 0; j < 9; ++j)
    if (p(0, j) != 0.0) row0.insert(j);
  EXPECT_EQ(row0, (std::set<std::size_t>{1, 2, 4}));
  for (std::size_t j : row0) EXPECT_EQ(p(0, j), 1.0);
  const GeometricContext ctx = BuildGeometricContext({3, 3}, 2.0);
  for (std::size_t j : row0) EXPECT_DOUBLE_EQ(ctx.directions[3](0, j), 1.0 / 3.0);
}

// Enumerates neighbours of every cell directly and checks that the four
// directions partition the disk and that rows are uniform.
TEST(GeometricAdjacencyTest, DirectionsPartitionTheDisk) {
  const GridSpec grid{4, 5};
  const double radius = 2.3;
  const GeometricContext ctx = BuildGeometricContext(grid, radius);
  ASSERT_EQ(ctx.directions.size(), 4u);
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    for (std::size_t j = 0; j < grid.cells(); ++j) {
      const double dr = static_cast<double>(j / grid.cols) - static_cast<double>(i / grid.cols);
      const double dc = static_cast<double>(j % grid.cols) - static_cast<double>(i % grid.cols);
      const bool in_disk = i != j && std::hypot(dr, dc) <= radius + 1e-12;
      int hits = 0;
      for (const BoolMatrix& m : ctx.masks) hits += m(i, j) ? 1 : 0;
      EXPECT_EQ(hits, in_disk ? 1 : 0) << i << "->" << j;
    }
  }
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      const std::size_t count = ctx.masks[c].CountRow(i);
      double sum = 0.0;
      for (std::size_t j = 0; j < grid.cells(); ++j) {
        if (ctx.masks[c](i, j)) EXPECT_DOUBLE_EQ(ctx.directions[c](i, j), 1.0 / count);
        sum += ctx.directions[c](i, j);
      }
      EXPECT_NEAR(sum, count == 0 ? 0.0 : 1.0, 1e-12);
    }
  }
}

TEST(GeometricAdjacencyTest, OppositeDirectionsAreTransposedSupports) {
  const GeometricContext ctx = BuildGeometricContext({5, 4}, 2.0);
  EXPECT_EQ(ctx.masks[0], BoolMatrix::NonZeros(Transpose(ctx.directions[1])));
  EXPECT_EQ(ctx.masks[2], BoolMatrix::NonZeros(Transpose(ctx.directions[3])));
}

TEST(GeometricAdjacencyTest, RejectsBadInput) {
  EXPECT_THROW(BuildGeometricAdjacency({0, 3}, 1.0, Direction::kTop), std::invalid_argument);
  EXPECT_THROW(BuildGeometricAdjacency({3, 3}, -1.0, Direction::kTop), std::invalid_argument);
}

TEST(DirectionTest, NamesRoundTrip) {
  for (Direction d : kAllDirections) EXPECT_EQ(ParseDirection(DirectionName(d)), d);
  EXPECT_THROW(ParseDirection("diagonal"), std::invalid_argument);
}

TEST(SemanticAdjacencyTest, CosineHandExample) {
  const Matrix pooled = Matrix::FromRows({{1, 0}, {0.9, 0.1}, {-1, 0}});
  const SemanticContext s = BuildSemanticAdjacency(pooled, 1, Similarity::kCosine);
  EXPECT_EQ(Support(s.adjacency), (Pairs{{0, 1}, {1, 0}, {2, 1}}));
  EXPECT_EQ(s.mask, BoolMatrix::NonZeros(s.adjacency));
}

TEST(SemanticAdjacencyTest, FullNeighbourhood) {
  std::mt19937_64 rng(1);
  const Matrix pooled = testing::RandomMatrix(5, 3, rng);
  const SemanticContext s = BuildSemanticAdjacency(pooled, 4, Similarity::kDot);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(s.mask(i, j), i != j);
      if (i != j) EXPECT_DOUBLE_EQ(s.adjacency(i, j), 0.25);
    }
}

TEST(SemanticAdjacencyTest, IdenticalRowsBreakTiesByIndex) {
  const Matrix pooled(5, 2, 1.0);
  const SemanticContext s = BuildSemanticAdjacency(pooled, 2, Similarity::kCosine);
  EXPECT_EQ(Support(s.adjacency),
            (Pairs{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {4, 0}, {4, 1}}));
}

TEST(SemanticAdjacencyTest, ZeroRowFallsBackToDot) {
  const Matrix pooled = Matrix::FromRows({{0, 0}, {1, 0}, {3, 1}});
  const SemanticContext s = BuildSemanticAdjacency(pooled, 1, Similarity::kCosine);
  // Every dot product with the zero row is 0, so the lowest index wins.
  EXPECT_EQ(s.adjacency(0, 1), 1.0);
}

TEST(SemanticAdjacencyTest, RejectsTooManyNeighbours) {
  EXPECT_THROW(BuildSemanticAdjacency(Matrix(3, 2, 1.0), 3, Similarity::kCosine),
               std::invalid_argument);
  EXPECT_THROW(BuildSemanticAdjacency(Matrix(3, 2, 1.0), 0, Similarity::kCosine),
               std::invalid_argument);
}

TEST(SemanticLinksTest, EmptyListGivesZeroMatrix) {
  const std::vector<std::string> ids = {"a", "b"};
  const SemanticContext s = LoadSemanticLinks(ids, {});
  EXPECT_EQ(s.adjacency, Matrix(2, 2));
  EXPECT_EQ(s.mask.Count(), 0u);
}

TEST(SemanticLinksTest, UniformSplitAndDeduplication) {
  const std::vector<std::string> ids = {"a", "b", "c"};
  const std::vector<std::pair<std::string, std::string>> links = {
      {"a", "b"}, {"a", "c"}, {"a", "c"}};
  const SemanticContext s = LoadSemanticLinks(ids, links);
  EXPECT_EQ(s.adjacency, Matrix::FromRows({{0, 0.5, 0.5}, {0, 0, 0}, {0, 0, 0}}));
}

TEST(SemanticLinksTest, UnknownIdIsNamed) {
  const std::vector<std::string> ids = {"a", "b"};
  const std::vector<std::pair<std::string, std::string>> links = {{"a", "zebra"}};
  try {
    LoadSemanticLinks(ids, links);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos);
  }
}

TEST(RowNormalizeTest, Examples) {
  EXPECT_EQ(RowNormalize(Matrix::FromRows({{2, 2}, {0, 0}})),
            Matrix::FromRows({{0.5, 0.5}, {0, 0}}));
  const Matrix stochastic = Matrix::FromRows({{0.25, 0.75}, {1, 0}});
  EXPECT_EQ(RowNormalize(stochastic), stochastic);
  std::mt19937_64 rng(2);
  const Matrix r = RowNormalize(testing::RandomMatrix(4, 4, rng, 0.1, 1.0));
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (double v : r.row(i)) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_THROW(RowNormalize(Matrix::FromRows({{1, -1}})), std::invalid_argument);
}

}  // namespace
}  // namespace dhcn
