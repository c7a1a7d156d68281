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

#include "dhcn/feature_maps.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dhcn/error.h"
#include "dhcn/linalg.h"

namespace dhcn {

std::string_view InitialMapKindName(InitialMapKind kind) {
  return kind == InitialMapKind::kLinear ? "linear" : "hi-kpca";
}

InitialMapKind ParseInitialMapKind(std::string_view name) {
  if (name == "linear") return InitialMapKind::kLinear;
  if (name == "hi-kpca" || name == "hi_kpca") return InitialMapKind::kHiKpca;
  throw ValidationError("unknown initial map '" + std::string(name) +
                        "' (expected linear or hi-kpca)");
}

double HiKernel(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("hi_kernel: length mismatch " +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0 || y[i] < 0.0) {
      throw ValidationError("hi_kernel: negative histogram entry at index " +
                            std::to_string(i));
    }
    s += std::min(x[i], y[i]);
  }
  return s;
}

Matrix HiGram(const Matrix& a, const Matrix& b) {
  Matrix g(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) g(i, j) = HiKernel(a.row(i), b.row(j));
  return g;
}

Matrix L1NormalizeRows(const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    if (s == 0.0) continue;
    for (double& v : row) v /= s;
  }
  return out;
}

Matrix InitialMapLinear(const Matrix& features) { return features; }

InitialMapSpec FitKpca(const Matrix& landmarks, std::size_t dim,
                       double eigenvalue_floor) {
  const std::size_t m = landmarks.rows();
  if (dim < 1 || dim > m) {
    throw ValidationError("kpca dim must satisfy 1 <= dim <= landmarks (dim=" +
                          std::to_string(dim) + ", landmarks=" +
                          std::to_string(m) + ")");
  }
  const SymEigResult eig = SymEig(HiGram(landmarks, landmarks));
  std::size_t kept = 0;
  while (kept < dim && eig.values[kept] >= eigenvalue_floor) ++kept;
  if (kept == 0) {
    throw NumericError("degenerate kernel: no landmark Gram eigenvalue above " +
                       std::to_string(eigenvalue_floor));
  }
  InitialMapSpec spec;
  spec.kind = InitialMapKind::kHiKpca;
  spec.kpca_dim = kept;
  spec.landmarks = landmarks;
  spec.eigenvalue_floor = eigenvalue_floor;
  spec.projection = Matrix(m, kept);
  for (std::size_t c = 0; c < kept; ++c) {
    const double inv_sqrt = 1.0 / std::sqrt(eig.values[c]);
    for (std::size_t r = 0; r < m; ++r)
      spec.projection(r, c) = eig.vectors(r, c) * inv_sqrt;
  }
  return spec;
}

Matrix ApplyKpca(const InitialMapSpec& spec, const Matrix& features) {
  if (spec.kind != InitialMapKind::kHiKpca) {
    throw ValidationError("apply_kpca: map spec is not hi-kpca");
  }
  if (features.cols() != spec.landmarks.cols()) {
    throw ValidationError("apply_kpca: feature width " +
                          std::to_string(features.cols()) +
                          " does not match landmark width " +
                          std::to_string(spec.landmarks.cols()));
  }
  return MatMul(HiGram(features, spec.landmarks), spec.projection);
}

Matrix ApplyInitialMap(const InitialMapSpec& spec, const Matrix& features) {
  if (spec.kind == InitialMapKind::kLinear) return InitialMapLinear(features);
  return ApplyKpca(spec, spec.l1_normalize ? L1NormalizeRows(features) : features);
}

Matrix SampleLandmarks(std::span<const Matrix> cells, std::size_t count,
                       std::uint64_t seed) {
  std::size_t total = 0;
  std::size_t width = cells.empty() ? 0 : cells.front().cols();
  for (const Matrix& m : cells) total += m.rows();
  count = std::min(count, total);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates; the first `count` positions are the sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));

  Matrix out(count, width);
  std::size_t image = 0;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    while (order[i] >= offset + cells[image].rows()) offset += cells[image++].rows();
    auto src = cells[image].row(order[i] - offset);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace dhcn
