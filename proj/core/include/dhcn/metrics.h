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

#ifndef DHCN_METRICS_H_
#define DHCN_METRICS_H_

#include <span>
#include <vector>

#include "dhcn/matrix.h"

namespace dhcn {

struct ConceptStats {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double average_precision = 0.0;
  // False when the concept has no positive image; its AP is then reported as
  // 0 and it does not enter the mAP.
  bool has_positive = false;
};

struct EvalReport {
  double mf_s = 0.0;
  double mf_c = 0.0;
  double map = 0.0;
  std::vector<ConceptStats> per_concept;
};

// F1 between two sets given their confusion counts. Both sets empty scores 1.
double F1Score(std::size_t tp, std::size_t fp, std::size_t fn);

// Mean over images of the F1 between predicted and true label sets.
double MfSample(const BoolMatrix& pred, const BoolMatrix& truth);

// Mean over concepts of the F1 across images.
double MfConcept(const BoolMatrix& pred, const BoolMatrix& truth);

// Non-interpolated AP of one ranking; images sorted by descending score, ties
// broken by lower index. Returns 0 when there is no positive.
double AveragePrecision(std::span<const double> scores,
                        std::span<const bool> positives);

// Mean AP over concepts that have at least one positive. Throws
// ValidationError("mAP undefined") when there is none.
double MeanAveragePrecision(const Matrix& scores, const BoolMatrix& truth);

EvalReport Evaluate(const Matrix& scores, const BoolMatrix& pred,
                    const BoolMatrix& truth);

}  // namespace dhcn

#endif  // DHCN_METRICS_H_
