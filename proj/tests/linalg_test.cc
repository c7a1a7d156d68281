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

#include "dhcn/linalg.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_util.h"

namespace dhcn {
namespace {

using testing::NaiveMatMul;
using testing::RandomMatrix;
using testing::RandomSymmetric;

TEST(MatMulTest, IdentityLeavesMatrixUnchanged) {
  const Matrix a = Matrix::FromRows({{1, 2}, {3, 4}});
  EXPECT_EQ(MatMul(Matrix::Identity(2), a), a);
}

TEST(MatMulTest, ShiftTimesColumn) {
  const Matrix p = Matrix::FromRows({{0, 1}, {0, 0}});
  const Matrix x = Matrix::FromRows({{1}, {2}});
  EXPECT_EQ(MatMul(p, x), Matrix::FromRows({{2}, {0}}));
}

TEST(MatMulTest, MatchesTripleLoop) {
  std::mt19937_64 rng(7);
  const Matrix a = RandomMatrix(5, 4, rng);
  const Matrix b = RandomMatrix(4, 3, rng);
  const Matrix c = MatMul(a, b);
  const Matrix ref = NaiveMatMul(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c(i, j), ref(i, j), 1e-12);
}

TEST(MatMulTest, TransposedVariantsAgree) {
  std::mt19937_64 rng(8);
  const Matrix a = RandomMatrix(4, 6, rng);
  const Matrix b = RandomMatrix(4, 3, rng);
  const Matrix c = RandomMatrix(5, 6, rng);
  EXPECT_LE(RelativeError(MatMulTransA(a, b), NaiveMatMul(Transpose(a), b)), 1e-14);
  EXPECT_LE(RelativeError(MatMulTransB(a, c), NaiveMatMul(a, Transpose(c))), 1e-14);
}

TEST(MatMulTest, Associative) {
  std::mt19937_64 rng(9);
  const Matrix a = RandomMatrix(4, 5, rng);
  const Matrix b = RandomMatrix(5, 6, rng);
  const Matrix c = RandomMatrix(6, 3, rng);
  EXPECT_LE(RelativeError(MatMul(MatMul(a, b), c), MatMul(a, MatMul(b, c))), 1e-9);
}

TEST(MatMulTest, RejectsShapeMismatch) {
  EXPECT_THROW(MatMul(Matrix(2, 3), Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(Add(Matrix(2, 3), Matrix(3, 2)), std::invalid_argument);
}

TEST(TransposeTest, Examples) {
  EXPECT_EQ(Transpose(Matrix::FromRows({{1, 2}, {3, 4}})), Matrix::FromRows({{1, 3}, {2, 4}}));
  const Matrix row = Matrix::FromRows({{1, 2, 3}});
  const Matrix col = Transpose(row);
  EXPECT_EQ(col.rows(), 3u);
  EXPECT_EQ(col.cols(), 1u);
  std::mt19937_64 rng(3);
  const Matrix a = RandomMatrix(3, 7, rng);
  EXPECT_EQ(Transpose(Transpose(a)), a);
}

TEST(FrobeniusNormTest, Examples) {
  EXPECT_EQ(FrobeniusNorm(Matrix(3, 2)), 0.0);
  EXPECT_DOUBLE_EQ(FrobeniusNorm(Matrix::FromRows({{3, 4}})), 5.0);
  std::mt19937_64 rng(4);
  const Matrix a = RandomMatrix(4, 6, rng);
  const double n = FrobeniusNorm(a);
  EXPECT_NEAR(n * n, Trace(NaiveMatMul(a, Transpose(a))), 1e-10);
}

TEST(ConcatTest, HConcatAndColumnBlockRoundTrip) {
  std::mt19937_64 rng(5);
  const std::vector<Matrix> blocks = {RandomMatrix(3, 2, rng), RandomMatrix(3, 4, rng)};
  const Matrix all = HConcat(blocks);
  ASSERT_EQ(all.cols(), 6u);
  EXPECT_EQ(ColumnBlock(all, 0, 2), blocks[0]);
  EXPECT_EQ(ColumnBlock(all, 2, 4), blocks[1]);
}

TEST(HadamardTest, ZeroesOutsideMask) {
  BoolMatrix mask(2, 2);
  mask.set(0, 1, true);
  EXPECT_EQ(Hadamard(Matrix::FromRows({{1, 2}, {3, 4}}), mask),
            Matrix::FromRows({{0, 2}, {0, 0}}));
}

TEST(FiniteTest, DetectsNan) {
  Matrix a(2, 2, 1.0);
  EXPECT_TRUE(AllFinite(a));
  a(1, 0) = std::nan("");
  EXPECT_FALSE(AllFinite(a));
}

TEST(SymEigTest, Diagonal) {
  const SymEigResult r = SymEig(Matrix::FromRows({{1, 0}, {0, 3}}));
  ASSERT_EQ(r.values.size(), 2u);
  EXPECT_DOUBLE_EQ(r.values[0], 3.0);
  EXPECT_DOUBLE_EQ(r.values[1], 1.0);
  EXPECT_DOUBLE_EQ(std::abs(r.vectors(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(r.vectors(0, 1)), 1.0);
}

TEST(SymEigTest, TwoByTwoByHand) {
  // det([[2-l,1],[1,2-l]]) = (2-l)^2 - 1 = 0 gives l = 3, 1.
  const SymEigResult r = SymEig(Matrix::FromRows({{2, 1}, {1, 2}}));
  EXPECT_NEAR(r.values[0], 3.0, 1e-14);
  EXPECT_NEAR(r.values[1], 1.0, 1e-14);
}

TEST(SymEigTest, RandomSymmetricReconstructsAndIsOrthonormal) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix a = RandomSymmetric(6, rng);
    const SymEigResult r = SymEig(a);
    const Matrix& v = r.vectors;
    const Matrix vvt = NaiveMatMul(v, Transpose(v));
    EXPECT_LE(MaxAbs(Subtract(vvt, Matrix::Identity(6))), 1e-9);
    Matrix lambda(6, 6);
    double lmax = 1.0;
    for (std::size_t i = 0; i < 6; ++i) {
      lambda(i, i) = r.values[i];
      lmax = std::max(lmax, std::abs(r.values[i]));
      if (i > 0) EXPECT_GE(r.values[i - 1], r.values[i]);
    }
    const Matrix recon = NaiveMatMul(NaiveMatMul(v, lambda), Transpose(v));
    EXPECT_LE(MaxAbs(Subtract(recon, a)), 1e-8 * lmax);
  }
}

TEST(SymEigTest, TraceEqualsEigenvalueSum) {
  std::mt19937_64 rng(11);
  const Matrix a = RandomSymmetric(9, rng);
  const SymEigResult r = SymEig(a);
  double sum = 0.0;
  for (double l : r.values) sum += l;
  EXPECT_NEAR(sum, Trace(a), 1e-10);
}

TEST(SymEigTest, RejectsNonSquare) {
  EXPECT_THROW(SymEig(Matrix(2, 3)), std::invalid_argument);
}

}  // namespace
}  // namespace dhcn
