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

#include "dhcn/network.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dhcn/linalg.h"
#include "test_util.h"

namespace dhcn {
namespace {

using testing::MakeSmallInstance;
using testing::SmallInstance;
using testing::NaiveGram;
using testing::RandomMatrix;

PerLayerContexts SingleDirection(const Matrix& p, std::size_t layers) {
  PerLayerContexts ctx;
  ctx.geometric.assign(layers, {p});
  ctx.geometric_masks = {BoolMatrix::NonZeros(p)};
  return ctx;
}

PerLayerContexts SemanticOnly(const Matrix& p, std::size_t layers) {
  PerLayerContexts ctx;
  ctx.semantic.assign(layers, p);
  ctx.semantic_mask = BoolMatrix::NonZeros(p);
  return ctx;
}

Matrix PooledAll(const std::vector<Matrix>& maps) {
  Matrix out(maps.size(), maps.front().cols());
  for (std::size_t p = 0; p < maps.size(); ++p) {
    const auto v = Pool(maps[p]);
    std::copy(v.begin(), v.end(), out.row(p).begin());
  }
  return out;
}

TEST(ForwardGeometricTest, ZeroLayersIsIdentity) {
  std::mt19937_64 rng(1);
  const Matrix phi0 = RandomMatrix(4, 3, rng);
  const auto layers = ForwardGeometric(phi0, SingleDirection(Matrix(4, 4), 0), {0, 0, 1, 1});
  ASSERT_EQ(layers.size(), 1u);
  EXPECT_EQ(layers[0], phi0);
}

TEST(ForwardGeometricTest, HandExample) {
  const Matrix phi0 = Matrix::FromRows({{1}, {2}});
  const Matrix p = Matrix::FromRows({{0, 1}, {0, 0}});
  const DepthConfig depth{1, 0, 1.0, 1.0};
  const auto layers = ForwardGeometric(phi0, SingleDirection(p, 1), depth);
  ASSERT_EQ(layers.size(), 2u);
  EXPECT_EQ(layers[1], Matrix::FromRows({{1, 2}, {2, 0}}));
  const Matrix expected = Matrix::FromRows({{5, 2}, {2, 4}});
  EXPECT_EQ(Gram(layers[1]), expected);
  EXPECT_EQ(FixedPointKernelGeo(Gram(phi0), SingleDirection(p, 1), depth), expected);
}

TEST(ForwardGeometricTest, ZeroGammaKeepsInputGram) {
  SmallInstance inst = MakeSmallInstance(3);
  inst.depth.gamma1 = 0.0;
  const auto layers = ForwardGeometric(inst.phi0[0], inst.contexts, inst.depth);
  const Matrix s = Gram(inst.phi0[0]);
  for (const Matrix& layer : layers) EXPECT_LE(RelativeError(Gram(layer), s), 1e-15);
  EXPECT_EQ(FixedPointKernelGeo(s, inst.contexts, inst.depth), s);
}

TEST(ForwardGeometricTest, WidthsFollowTheRecurrence) {
  const SmallInstance inst = MakeSmallInstance(4);
  const auto layers = ForwardGeometric(inst.phi0[0], inst.contexts, inst.depth);
  ASSERT_EQ(layers.size(), 3u);
  EXPECT_EQ(layers[0].cols(), 5u);
  EXPECT_EQ(layers[1].cols(), 25u);
  EXPECT_EQ(layers[2].cols(), 105u);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(GeometricWidth(5, 4, t), layers[t].cols());
  EXPECT_EQ(SemanticWidth(105, 2), 315u);
}

TEST(ForwardGeometricTest, DimensionMismatchNamesLayer) {
  SmallInstance inst = MakeSmallInstance(5);
  inst.contexts.geometric[1][2] = Matrix(3, 3);
  try {
    ForwardGeometric(inst.phi0[0], inst.contexts, inst.depth);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
}

TEST(ForwardGeometricTest, GramMatchesFixedPointRecursion) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const SmallInstance inst = MakeSmallInstance(seed);
    for (const Matrix& phi0 : inst.phi0) {
      const auto layers = ForwardGeometric(phi0, inst.contexts, inst.depth);
      for (std::size_t t = 0; t < layers.size(); ++t) {
        DepthConfig partial = inst.depth;
        partial.geo_layers = t;
        const Matrix k = FixedPointKernelGeo(NaiveGram(phi0), inst.contexts, partial);
        EXPECT_LE(RelativeError(NaiveGram(layers[t]), k), 1e-9) << "layer " << t;
      }
    }
  }
}

TEST(ForwardGeometricTest, LayerGramsArePsd) {
  const SmallInstance inst = MakeSmallInstance(6);
  const auto layers = ForwardGeometric(inst.phi0[1], inst.contexts, inst.depth);
  for (const Matrix& layer : layers) {
    const SymEigResult eig = SymEig(Gram(layer));
    EXPECT_GE(eig.values.back(), -1e-8 * eig.values.front());
  }
}

TEST(PoolTest, Examples) {
  EXPECT_EQ(Pool(Matrix::FromRows({{1, 2}, {2, 0}})), (std::vector<double>{3, 2}));
  EXPECT_EQ(Pool(Matrix::FromRows({{4, -1, 2}})), (std::vector<double>{4, -1, 2}));
}

TEST(PoolTest, PooledKernelIsDoubleSum) {
  std::mt19937_64 rng(7);
  const Matrix a = RandomMatrix(6, 4, rng);
  const Matrix b = RandomMatrix(9, 4, rng);
  const auto pa = Pool(a);
  const auto pb = Pool(b);
  double pooled = 0.0;
  for (std::size_t c = 0; c < 4; ++c) pooled += pa[c] * pb[c];
  double pairs = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) pairs += Dot(a.row(i), b.row(j));
  EXPECT_NEAR(pooled, pairs, 1e-10);
}

// Relabelling cells and conjugating every context by the same permutation
// must leave the pooled map unchanged.
TEST(PoolTest, InvariantToCellPermutation) {
  const SmallInstance inst = MakeSmallInstance(8);
  const std::size_t n = inst.grid.cells();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(8);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) q(i, perm[i]) = 1.0;

  PerLayerContexts permuted = inst.contexts;
  for (auto& layer : permuted.geometric)
    for (Matrix& p : layer) p = MatMulTransB(MatMul(q, p), q);
  for (BoolMatrix& m : permuted.geometric_masks)
    m = BoolMatrix::NonZeros(MatMulTransB(MatMul(q, Matrix(n, n, 1.0)), q));

  const auto base = ForwardGeometric(inst.phi0[2], inst.contexts, inst.depth);
  const auto moved = ForwardGeometric(MatMul(q, inst.phi0[2]), permuted, inst.depth);
  const auto a = Pool(base.back());
  const auto b = Pool(moved.back());
  for (std::size_t c = 0; c < a.size(); ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
}

TEST(ForwardSemanticTest, ZeroLayersReturnsPooled) {
  const Matrix pooled = Matrix::FromRows({{1, 2}, {3, 4}});
  const auto layers = ForwardSemantic(pooled, SemanticOnly(Matrix(2, 2), 0), {0, 0, 1, 1});
  ASSERT_EQ(layers.size(), 1u);
  EXPECT_EQ(layers[0], pooled);
}

TEST(ForwardSemanticTest, HandExample) {
  const Matrix pooled = Matrix::FromRows({{1}, {3}});
  const Matrix p = Matrix::FromRows({{0, 1}, {1, 0}});
  const DepthConfig depth{0, 1, 1.0, 1.0};
  const auto layers = ForwardSemantic(pooled, SemanticOnly(p, 1), depth);
  EXPECT_EQ(layers[1], Matrix::FromRows({{1, 3}, {3, 1}}));
  const Matrix expected = Matrix::FromRows({{10, 6}, {6, 10}});
  EXPECT_EQ(Gram(layers[1]), expected);
  EXPECT_EQ(FixedPointKernelSem(Gram(pooled), SemanticOnly(p, 1), depth), expected);
}

TEST(ForwardSemanticTest, ZeroGammaKeepsPooledGram) {
  SmallInstance inst = MakeSmallInstance(9);
  inst.depth.gamma2 = 0.0;
  const Matrix pooled = PooledAll(inst.phi0);
  const auto layers = ForwardSemantic(pooled, inst.contexts, inst.depth);
  EXPECT_LE(RelativeError(Gram(layers.back()), Gram(pooled)), 1e-15);
}

TEST(ForwardSemanticTest, GramMatchesFixedPointRecursion) {
  const SmallInstance inst = MakeSmallInstance(10);
  const LayerStack stack = ForwardAll(inst.phi0, inst.contexts, inst.depth);
  for (std::size_t t = 0; t < stack.semantic.size(); ++t) {
    DepthConfig partial = inst.depth;
    partial.sem_layers = t;
    const Matrix k = FixedPointKernelSem(NaiveGram(stack.pooled), inst.contexts, partial);
    EXPECT_LE(RelativeError(NaiveGram(stack.semantic[t]), k), 1e-9) << "layer " << t;
  }
}

TEST(ForwardAllTest, StackShapes) {
  const SmallInstance inst = MakeSmallInstance(11);
  const LayerStack stack = ForwardAll(inst.phi0, inst.contexts, inst.depth);
  ASSERT_EQ(stack.geometric.size(), 6u);
  EXPECT_EQ(stack.geometric[0].size(), 3u);
  EXPECT_EQ(stack.pooled.rows(), 6u);
  EXPECT_EQ(stack.pooled.cols(), 105u);
  EXPECT_EQ(stack.semantic.front(), stack.pooled);
  EXPECT_EQ(stack.final_maps().cols(), 315u);
}

TEST(FixedPointKernelTest, RejectsAsymmetricInput) {
  const SmallInstance inst = MakeSmallInstance(12);
  Matrix s = Gram(inst.phi0[0]);
  s(0, 1) += 1e-6;
  EXPECT_THROW(FixedPointKernelGeo(s, inst.contexts, inst.depth), std::invalid_argument);
}

// Direct four-index evaluation of tr(-KS') - alpha sum tr(K P K' P') + beta/2 ||K||^2.
double NaiveObjective(const Matrix& k, const Matrix& s, const std::vector<Matrix>& ps,
                      double alpha, double beta) {
  const std::size_t n = k.rows();
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) value += -k(i, j) * s(i, j) + 0.5 * beta * k(i, j) * k(i, j);
  for (const Matrix& p : ps) {
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t l = 0; l < n; ++l) tr += k(i, j) * p(j, a) * k(l, a) * p(i, l);
    value -= alpha * tr;
  }
  return value;
}

TEST(ObjectiveTest, ZeroKernel) {
  const SmallInstance inst = MakeSmallInstance(13);
  const Matrix s = Gram(inst.phi0[0]);
  EXPECT_EQ(ObjectiveGeo(Matrix(12, 12), s, inst.contexts.geometric[0], 0.3, 2.0), 0.0);
  const Matrix p = inst.contexts.semantic[0];
  EXPECT_EQ(ObjectiveSem(Matrix(6, 6), Gram(PooledAll(inst.phi0)), p, 0.3, 2.0), 0.0);
}

TEST(ObjectiveTest, MatchesNaiveSums) {
  const SmallInstance inst = MakeSmallInstance(14);
  std::mt19937_64 rng(14);
  const Matrix s = Gram(inst.phi0[0]);
  const Matrix k = testing::RandomSymmetric(12, rng);
  const double geo = ObjectiveGeo(k, s, inst.contexts.geometric[0], 0.7, 1.3);
  EXPECT_NEAR(geo, NaiveObjective(k, s, inst.contexts.geometric[0], 0.7, 1.3),
              1e-10 * std::max(1.0, std::abs(geo)));

  const Matrix st = Gram(PooledAll(inst.phi0));
  const Matrix ks = testing::RandomSymmetric(6, rng);
  const Matrix& p = inst.contexts.semantic[1];
  const double sem = ObjectiveSem(ks, st, p, 0.4, 0.9);
  EXPECT_NEAR(sem, NaiveObjective(ks, st, {p}, 0.4, 0.9), 1e-10 * std::max(1.0, std::abs(sem)));
}

TEST(ObjectiveTest, ContextFreeMinimizerIsInputKernel) {
  const SmallInstance inst = MakeSmallInstance(15);
  const Matrix s = Gram(inst.phi0[0]);
  const Matrix st = Gram(PooledAll(inst.phi0));
  double best_c = -1.0, best = 1e300, best_sem_c = -1.0, best_sem = 1e300;
  for (int i = 0; i <= 40; ++i) {
    const double c = 0.5 + 0.025 * i;
    const double v = ObjectiveGeo(Scale(s, c), s, inst.contexts.geometric[0], 0.0, 1.0);
    if (v < best) best = v, best_c = c;
    const double w = ObjectiveSem(Scale(st, c), st, inst.contexts.semantic[0], 0.0, 1.0);
    if (w < best_sem) best_sem = w, best_sem_c = c;
  }
  EXPECT_DOUBLE_EQ(best_c, 1.0);
  EXPECT_DOUBLE_EQ(best_sem_c, 1.0);
}

TEST(ObjectiveTest, ShapeMismatch) {
  EXPECT_THROW(ObjectiveSem(Matrix(3, 3), Matrix(2, 2), Matrix(3, 3), 0, 1),
               std::invalid_argument);
}

}  // namespace
}  // namespace dhcn
