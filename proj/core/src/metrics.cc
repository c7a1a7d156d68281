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
#include <memory>
#include <numeric>
#include <string>

#include "dhcn/error.h"

namespace dhcn {
namespace {

void RequireSameShape(const BoolMatrix& a, const BoolMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(std::string(op) + ": prediction is " + ShapeString(a) +
                          " but truth is " + ShapeString(b));
  }
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0;
};

}  // namespace

double F1Score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double MfSample(const BoolMatrix& pred, const BoolMatrix& truth) {
  RequireSameShape(pred, truth, "mf_sample");
  if (pred.rows() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t p = 0; p < pred.rows(); ++p) {
    Confusion c;
    for (std::size_t k = 0; k < pred.cols(); ++k) {
      c.tp += pred(p, k) && truth(p, k);
      c.fp += pred(p, k) && !truth(p, k);
      c.fn += !pred(p, k) && truth(p, k);
    }
    sum += F1Score(c.tp, c.fp, c.fn);
  }
  return sum / static_cast<double>(pred.rows());
}

double MfConcept(const BoolMatrix& pred, const BoolMatrix& truth) {
  RequireSameShape(pred, truth, "mf_concept");
  if (pred.cols() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < pred.cols(); ++k) {
    Confusion c;
    for (std::size_t p = 0; p < pred.rows(); ++p) {
      c.tp += pred(p, k) && truth(p, k);
      c.fp += pred(p, k) && !truth(p, k);
      c.fn += !pred(p, k) && truth(p, k);
    }
    sum += F1Score(c.tp, c.fp, c.fn);
  }
  return sum / static_cast<double>(pred.cols());
}

double AveragePrecision(std::span<const double> scores,
                        std::span<const bool> positives) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!positives[order[rank]]) continue;
    ++hits;
    ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  return hits == 0 ? 0.0 : ap / static_cast<double>(hits);
}

double MeanAveragePrecision(const Matrix& scores, const BoolMatrix& truth) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols()) {
    throw ValidationError("mAP: scores are " + ShapeString(scores) +
                          " but truth is " + ShapeString(truth));
  }
  double sum = 0.0;
  std::size_t counted = 0;
  std::vector<double> column(scores.rows());
  std::unique_ptr<bool[]> positive(new bool[scores.rows()]);
  for (std::size_t k = 0; k < scores.cols(); ++k) {
    bool any = false;
    for (std::size_t p = 0; p < scores.rows(); ++p) {
      column[p] = scores(p, k);
      positive[p] = truth(p, k);
      any = any || positive[p];
    }
    if (!any) continue;
    sum += AveragePrecision(column, {positive.get(), scores.rows()});
    ++counted;
  }
  if (counted == 0) throw ValidationError("mAP undefined: no concept has a positive image");
  return sum / static_cast<double>(counted);
}

EvalReport Evaluate(const Matrix& scores, const BoolMatrix& pred,
                    const BoolMatrix& truth) {
  RequireSameShape(pred, truth, "evaluate");
  EvalReport report;
  report.mf_s = MfSample(pred, truth);
  report.mf_c = MfConcept(pred, truth);
  report.map = MeanAveragePrecision(scores, truth);
  std::vector<double> column(scores.rows());
  std::unique_ptr<bool[]> positive(new bool[scores.rows()]);
  for (std::size_t k = 0; k < truth.cols(); ++k) {
    Confusion c;
    ConceptStats stats;
    for (std::size_t p = 0; p < truth.rows(); ++p) {
      c.tp += pred(p, k) && truth(p, k);
      c.fp += pred(p, k) && !truth(p, k);
      c.fn += !pred(p, k) && truth(p, k);
      column[p] = scores(p, k);
      positive[p] = truth(p, k);
      stats.has_positive = stats.has_positive || positive[p];
    }
    // Empty denominators follow the F1 convention: both empty counts as 1.
    stats.precision = c.tp + c.fp == 0 ? (c.fn == 0 ? 1.0 : 0.0)
                                       : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    stats.recall = c.tp + c.fn == 0 ? (c.fp == 0 ? 1.0 : 0.0)
                                    : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    stats.f1 = F1Score(c.tp, c.fp, c.fn);
    stats.average_precision =
        AveragePrecision(column, {positive.get(), scores.rows()});
    report.per_concept.push_back(stats);
  }
  return report;
}

}  // namespace dhcn
