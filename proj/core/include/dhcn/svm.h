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

#ifndef DHCN_SVM_H_
#define DHCN_SVM_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dhcn/matrix.h"

namespace dhcn {

// Y(p, k) in {-1, +1}.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t images, std::size_t classes)
      : rows_(images), cols_(classes), values_(images * classes, -1) {}

  static LabelMatrix FromTruth(const BoolMatrix& truth);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  int operator()(std::size_t p, std::size_t k) const {
    return values_[p * cols_ + k];
  }
  void set(std::size_t p, std::size_t k, bool positive) {
    values_[p * cols_ + k] = positive ? 1 : -1;
  }

  BoolMatrix ToTruth() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int8_t> values_;
};

// One-vs-rest linear SVMs. Row k of `weights` is [w_k, b_k]; the bias sits in
// the last column and multiplies a constant 1.
struct SvmModel {
  Matrix weights;              // K x (d + 1)
  std::vector<double> c_k;     // per-class trade-off
  std::vector<double> c_pos;   // per-class positive-example multiplier

  std::size_t num_classes() const { return weights.rows(); }
  std::size_t map_width() const { return weights.cols() == 0 ? 0 : weights.cols() - 1; }

  // Upper bound of the dual variable for a sample with label y in class k.
  double SampleCost(std::size_t k, int y) const {
    return y > 0 ? c_k[k] * c_pos[k] : c_k[k];
  }

  bool operator==(const SvmModel&) const = default;
};

struct SvmOptions {
  // One value per class, or a single value broadcast to every class.
  std::vector<double> c = {1.0};
  // Scale the positive-example penalty of class k by #neg/#pos.
  bool balance_classes = false;
  // Maximum number of passes; one pass is `P` pair updates.
  std::size_t epochs = 1000;
  // Stop once the maximal KKT violation, or the largest dual-variable change
  // over a full pass, falls below this.
  double tol = 1e-6;
};

struct BinarySvmTrace {
  std::vector<double> dual_per_pass;
  double primal = 0.0;
  double dual = 0.0;
  std::size_t passes = 0;
  bool converged = false;
};

// sum_k 1/2 ||w_k||^2 + C_k sum_p cost * max(0, 1 - Y_k^p (w_k' x_p + b_k)).
// The bias is not regularized.
double HingeObjective(const SvmModel& model, const Matrix& maps,
                      const LabelMatrix& labels);

// Trains one binary problem per label column. `traces`, when non-null,
// receives one entry per class.
SvmModel TrainSvms(const Matrix& maps, const LabelMatrix& labels,
                   const SvmOptions& options,
                   std::vector<BinarySvmTrace>* traces = nullptr);

// P x K raw scores w_k' x_p + b_k.
Matrix Score(const SvmModel& model, const Matrix& maps);

// True where the score is strictly positive.
BoolMatrix Decide(const Matrix& scores);

}  // namespace dhcn

#endif  // DHCN_SVM_H_
