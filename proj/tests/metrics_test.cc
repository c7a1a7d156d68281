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

#include "dhcn/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace dhcn {
namespace {

BoolMatrix Bools(std::initializer_list<std::initializer_list<int>> rows) {
  BoolMatrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (int v : row) m.set(r, c++, v != 0);
    ++r;
  }
  return m;
}

TEST(F1ScoreTest, Conventions) {
  EXPECT_EQ(F1Score(0, 0, 0), 1.0);
  EXPECT_EQ(F1Score(0, 1, 0), 0.0);
  EXPECT_EQ(F1Score(0, 0, 2), 0.0);
  EXPECT_DOUBLE_EQ(F1Score(1, 1, 1), 0.5);
}

TEST(MfSampleTest, Examples) {
  // Columns are concepts A, B.
  const BoolMatrix truth = Bools({{1, 1}, {1, 0}});
  const BoolMatrix pred = Bools({{1, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(MfSample(pred, truth), 2.0 / 3.0);
  EXPECT_EQ(MfSample(truth, truth), 1.0);
  EXPECT_EQ(MfSample(BoolMatrix(2, 2), truth), 0.0);
  EXPECT_THROW(MfSample(BoolMatrix(2, 3), truth), std::invalid_argument);
}

TEST(MfConceptTest, Examples) {
  const BoolMatrix truth = Bools({{1, 1}, {1, 0}, {0, 1}});
  const BoolMatrix pred = Bools({{1, 1}, {0, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(MfConcept(pred, truth), 0.75);
  EXPECT_EQ(MfConcept(truth, truth), 1.0);
  const BoolMatrix absent = Bools({{1, 0}, {0, 0}});
  EXPECT_EQ(MfConcept(absent, absent), 1.0);
}

TEST(AveragePrecisionTest, HandExample) {
  const std::vector<double> scores = {0.9, 0.8, 0.7};
  const bool positives[] = {true, false, true};
  EXPECT_DOUBLE_EQ(AveragePrecision(scores, positives), 5.0 / 6.0);
}

TEST(AveragePrecisionTest, TiesBreakByIndex) {
  const std::vector<double> scores = {0.5, 0.5};
  const bool first[] = {true, false};
  const bool second[] = {false, true};
  EXPECT_EQ(AveragePrecision(scores, first), 1.0);
  EXPECT_EQ(AveragePrecision(scores, second), 0.5);
}

TEST(MeanAveragePrecisionTest, PerfectRanking) {
  const Matrix scores = Matrix::FromRows({{3, -1}, {2, 1}, {-5, 0.5}});
  const BoolMatrix truth = Bools({{1, 0}, {1, 1}, {0, 1}});
  EXPECT_EQ(MeanAveragePrecision(scores, truth), 1.0);
}

TEST(MeanAveragePrecisionTest, SkipsConceptsWithoutPositives) {
  const Matrix scores = Matrix::FromRows({{0.9, 1}, {0.8, 2}, {0.7, 3}});
  const BoolMatrix truth = Bools({{1, 0}, {0, 0}, {1, 0}});
  EXPECT_DOUBLE_EQ(MeanAveragePrecision(scores, truth), 5.0 / 6.0);
}

TEST(MeanAveragePrecisionTest, UndefinedWithoutPositives) {
  try {
    MeanAveragePrecision(Matrix(3, 2), BoolMatrix(3, 2));
    FAIL() << "expected an exception";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("mAP undefined"), std::string::npos);
  }
}

// Walks all orderings of the images and keeps the one that is consistent
// with "higher score first, lower index first on ties"; AP is then read off
// that ranking.
double BruteForceAp(const std::vector<double>& scores, const std::vector<bool>& positives) {
  std::vector<std::size_t> perm(scores.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t r = 0; r + 1 < perm.size() && ok; ++r) {
      const std::size_t a = perm[r], b = perm[r + 1];
      ok = scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    }
    if (!ok) continue;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < perm.size(); ++r) {
      if (positives[perm[r]]) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    return sum / static_cast<double>(hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return -1.0;
}

TEST(MeanAveragePrecisionTest, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> level(0, 4);  // coarse scores force ties
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix scores(4, 3);
    BoolMatrix truth(4, 3);
    for (std::size_t p = 0; p < 4; ++p)
      for (std::size_t k = 0; k < 3; ++k) {
        scores(p, k) = 0.25 * level(rng);
        truth.set(p, k, coin(rng));
      }
    truth.set(static_cast<std::size_t>(trial % 4), 0, true);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> s(4);
      std::vector<bool> t(4);
      bool any = false;
      for (std::size_t p = 0; p < 4; ++p) {
        s[p] = scores(p, k);
        t[p] = truth(p, k);
        any = any || t[p];
      }
      if (!any) continue;
      sum += BruteForceAp(s, t);
      ++used;
    }
    EXPECT_EQ(MeanAveragePrecision(scores, truth), sum / static_cast<double>(used))
        << "trial " << trial;
  }
}

TEST(MeanAveragePrecisionTest, InvariantToMonotoneTransformAndImagePermutation) {
  std::mt19937_64 rng(18);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.3);
  Matrix scores(10, 2);
  BoolMatrix truth(10, 2);
  for (std::size_t p = 0; p < 10; ++p)
    for (std::size_t k = 0; k < 2; ++k) {
      scores(p, k) = normal(rng);
      truth.set(p, k, coin(rng) || p == k);
    }
  const double base = MeanAveragePrecision(scores, truth);
  Matrix transformed = scores;
  for (double& v : transformed.data()) v = std::exp(3.0 * v) + 1.0;
  EXPECT_DOUBLE_EQ(MeanAveragePrecision(transformed, truth), base);

  std::vector<std::size_t> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix ps(10, 2);
  BoolMatrix pt(10, 2);
  for (std::size_t p = 0; p < 10; ++p)
    for (std::size_t k = 0; k < 2; ++k) {
      ps(p, k) = scores(perm[p], k);
      pt.set(p, k, truth(perm[p], k));
    }
  EXPECT_DOUBLE_EQ(MeanAveragePrecision(ps, pt), base);
}

TEST(EvaluateTest, ReportIsConsistent) {
  const Matrix scores = Matrix::FromRows({{0.9, -1}, {0.8, 0.5}, {0.7, -0.2}});
  const BoolMatrix truth = Bools({{1, 0}, {0, 1}, {1, 0}});
  const BoolMatrix pred = Bools({{1, 0}, {1, 1}, {0, 0}});
  const EvalReport r = Evaluate(scores, pred, truth);
  EXPECT_DOUBLE_EQ(r.mf_s, MfSample(pred, truth));
  EXPECT_DOUBLE_EQ(r.mf_c, MfConcept(pred, truth));
  EXPECT_DOUBLE_EQ(r.map, MeanAveragePrecision(scores, truth));
  ASSERT_EQ(r.per_concept.size(), 2u);
  EXPECT_DOUBLE_EQ(r.per_concept[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(r.per_concept[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(r.per_concept[1].f1, 1.0);
  for (const ConceptStats& s : r.per_concept) {
    EXPECT_GE(s.average_precision, 0.0);
    EXPECT_LE(s.average_precision, 1.0);
  }
}

}  // namespace
}  // namespace dhcn
