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

#ifndef DHCN_FEATURE_MAPS_H_
#define DHCN_FEATURE_MAPS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "dhcn/matrix.h"

namespace dhcn {

enum class InitialMapKind { kLinear, kHiKpca };

std::string_view InitialMapKindName(InitialMapKind kind);
InitialMapKind ParseInitialMapKind(std::string_view name);

// Definition of the per-cell input map. For kHiKpca, a cell x is mapped to
// projection' * [HI(x, l_1) ... HI(x, l_m)].
struct InitialMapSpec {
  InitialMapKind kind = InitialMapKind::kLinear;
  std::size_t kpca_dim = 0;
  Matrix landmarks;   // m x d0
  Matrix projection;  // m x kpca_dim
  double eigenvalue_floor = 1e-10;
  // Cells are L1-normalized before the HI kernel is evaluated.
  bool l1_normalize = false;

  // Width of the mapped rows for input width `d0`.
  std::size_t OutputDim(std::size_t d0) const {
    return kind == InitialMapKind::kLinear ? d0 : kpca_dim;
  }

  bool operator==(const InitialMapSpec&) const = default;
};

// Histogram intersection sum_i min(x_i, y_i).
double HiKernel(std::span<const double> x, std::span<const double> y);

// HI Gram between the rows of a and the rows of b.
Matrix HiGram(const Matrix& a, const Matrix& b);

// Each nonzero row divided by its L1 norm.
Matrix L1NormalizeRows(const Matrix& a);

// The linear kernel's explicit map is the identity.
Matrix InitialMapLinear(const Matrix& features);

// Eigendecomposes the landmark HI Gram and keeps the leading `dim`
// components whose eigenvalue clears `eigenvalue_floor`.
InitialMapSpec FitKpca(const Matrix& landmarks, std::size_t dim,
                       double eigenvalue_floor = 1e-10);

// Out-of-sample projection of the rows of `features`.
Matrix ApplyKpca(const InitialMapSpec& spec, const Matrix& features);

// Dispatches on spec.kind, applying L1 normalization when requested.
Matrix ApplyInitialMap(const InitialMapSpec& spec, const Matrix& features);

// Uniform sample (without replacement) of `count` rows drawn from the
// concatenation of `cells`.
Matrix SampleLandmarks(std::span<const Matrix> cells, std::size_t count,
                       std::uint64_t seed);

}  // namespace dhcn

#endif  // DHCN_FEATURE_MAPS_H_
