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

#include <cmath>
#include <string>

#include "dhcn/error.h"
#include "dhcn/linalg.h"

namespace dhcn {
namespace {

void RequireSquare(const Matrix& m, std::size_t n, const std::string& what) {
  if (m.rows() != n || m.cols() != n) {
    throw ValidationError(what + ": expected " + std::to_string(n) + "x" +
                          std::to_string(n) + ", got " + ShapeString(m));
  }
}

void RequireSymmetric(const Matrix& s, const char* what) {
  if (s.rows() != s.cols()) {
    throw ValidationError(std::string(what) + ": matrix must be square, got " +
                          ShapeString(s));
  }
  const double scale = std::max(1.0, MaxAbs(s));
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-9 * scale) {
        throw ValidationError(std::string(what) + ": input is not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
}

// tr(A B') = sum_ij A_ij B_ij.
double TraceABt(const Matrix& a, const Matrix& b) {
  return Dot(a.data(), b.data());
}

}  // namespace

PerLayerContexts MakePerLayerContexts(const GeometricContext& geometric,
                                      const SemanticContext* semantic,
                                      const DepthConfig& depth) {
  PerLayerContexts out;
  out.geometric_masks = geometric.masks;
  out.geometric.assign(depth.geo_layers, geometric.directions);
  if (depth.sem_layers > 0) {
    if (semantic == nullptr) {
      throw ValidationError("semantic layers requested without a semantic context");
    }
    out.semantic_mask = semantic->mask;
    out.semantic.assign(depth.sem_layers, semantic->adjacency);
  }
  return out;
}

std::size_t GeometricWidth(std::size_t d0, std::size_t directions,
                           std::size_t layer) {
  std::size_t d = d0;
  for (std::size_t t = 0; t < layer; ++t) d = d0 + directions * d;
  return d;
}

std::size_t SemanticWidth(std::size_t d_pool, std::size_t layer) {
  return d_pool * (layer + 1);
}

std::vector<Matrix> ForwardGeometric(const Matrix& phi0,
                                     const PerLayerContexts& contexts,
                                     const DepthConfig& depth) {
  if (contexts.geometric.size() < depth.geo_layers) {
    throw ValidationError("forward_geometric: " +
                          std::to_string(contexts.geometric.size()) +
                          " context layers for depth " +
                          std::to_string(depth.geo_layers));
  }
  const double g = std::sqrt(depth.gamma1);
  std::vector<Matrix> layers;
  layers.reserve(depth.geo_layers + 1);
  layers.push_back(phi0);
  for (std::size_t t = 0; t < depth.geo_layers; ++t) {
    std::vector<Matrix> blocks;
    blocks.reserve(contexts.geometric[t].size() + 1);
    blocks.push_back(phi0);
    for (std::size_t c = 0; c < contexts.geometric[t].size(); ++c) {
      const Matrix& p = contexts.geometric[t][c];
      RequireSquare(p, phi0.rows(),
                    "forward_geometric layer " + std::to_string(t) +
                        " direction " + std::to_string(c));
      blocks.push_back(Scale(MatMul(p, layers.back()), g));
    }
    layers.push_back(HConcat(blocks));
  }
  return layers;
}

std::vector<double> Pool(const Matrix& activations) {
  std::vector<double> out(activations.cols(), 0.0);
  for (std::size_t i = 0; i < activations.rows(); ++i) {
    auto row = activations.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
  return out;
}

std::vector<Matrix> ForwardSemantic(const Matrix& pooled,
                                    const PerLayerContexts& contexts,
                                    const DepthConfig& depth) {
  if (contexts.semantic.size() < depth.sem_layers) {
    throw ValidationError("forward_semantic: " +
                          std::to_string(contexts.semantic.size()) +
                          " context layers for depth " +
                          std::to_string(depth.sem_layers));
  }
  const double g = std::sqrt(depth.gamma2);
  std::vector<Matrix> layers;
  layers.reserve(depth.sem_layers + 1);
  layers.push_back(pooled);
  for (std::size_t t = 0; t < depth.sem_layers; ++t) {
    const Matrix& p = contexts.semantic[t];
    RequireSquare(p, pooled.rows(), "forward_semantic layer " + std::to_string(t));
    const Matrix blocks[] = {pooled, Scale(MatMul(p, layers.back()), g)};
    layers.push_back(HConcat(blocks));
  }
  return layers;
}

LayerStack ForwardAll(std::span<const Matrix> phi0_per_image,
                      const PerLayerContexts& contexts,
                      const DepthConfig& depth) {
  LayerStack stack;
  stack.geometric.reserve(phi0_per_image.size());
  for (const Matrix& phi0 : phi0_per_image)
    stack.geometric.push_back(ForwardGeometric(phi0, contexts, depth));
  const std::size_t width =
      stack.geometric.empty() ? 0 : stack.geometric.front().back().cols();
  stack.pooled = Matrix(phi0_per_image.size(), width);
  for (std::size_t p = 0; p < stack.geometric.size(); ++p) {
    const std::vector<double> v = Pool(stack.geometric[p].back());
    if (v.size() != width) {
      throw ValidationError("image " + std::to_string(p) +
                            " has inconsistent map width");
    }
    std::copy(v.begin(), v.end(), stack.pooled.row(p).begin());
  }
  stack.semantic = ForwardSemantic(stack.pooled, contexts, depth);
  return stack;
}

Matrix FixedPointKernelGeo(const Matrix& s, const PerLayerContexts& contexts,
                           const DepthConfig& depth) {
  RequireSymmetric(s, "fixed_point_kernel_geo");
  Matrix k = s;
  for (std::size_t t = 0; t < depth.geo_layers; ++t) {
    Matrix next = s;
    for (const Matrix& p : contexts.geometric.at(t)) {
      RequireSquare(p, s.rows(), "fixed_point_kernel_geo layer " + std::to_string(t));
      next = Add(next, Scale(MatMulTransB(MatMul(p, k), p), depth.gamma1));
    }
    k = std::move(next);
  }
  return k;
}

Matrix FixedPointKernelSem(const Matrix& s_tilde,
                           const PerLayerContexts& contexts,
                           const DepthConfig& depth) {
  RequireSymmetric(s_tilde, "fixed_point_kernel_sem");
  Matrix k = s_tilde;
  for (std::size_t t = 0; t < depth.sem_layers; ++t) {
    const Matrix& p = contexts.semantic.at(t);
    RequireSquare(p, s_tilde.rows(), "fixed_point_kernel_sem layer " + std::to_string(t));
    k = Add(s_tilde, Scale(MatMulTransB(MatMul(p, k), p), depth.gamma2));
  }
  return k;
}

double ObjectiveGeo(const Matrix& k, const Matrix& s,
                    std::span<const Matrix> directions, double alpha1,
                    double beta1) {
  if (k.rows() != s.rows() || k.cols() != s.cols()) {
    throw ValidationError("objective_geo: K is " + ShapeString(k) + " but S is " +
                          ShapeString(s));
  }
  double context = 0.0;
  for (const Matrix& p : directions) {
    RequireSquare(p, k.rows(), "objective_geo context");
    // tr(K P K' P') = <K P, P K>_F
    context += TraceABt(MatMul(k, p), MatMul(p, k));
  }
  const double norm = FrobeniusNorm(k);
  return -TraceABt(k, s) - alpha1 * context + 0.5 * beta1 * norm * norm;
}

double ObjectiveSem(const Matrix& k, const Matrix& s_tilde, const Matrix& p_i,
                    double alpha2, double beta2) {
  const Matrix directions[] = {p_i};
  return ObjectiveGeo(k, s_tilde, directions, alpha2, beta2);
}

Matrix Gram(const Matrix& x) { return MatMulTransB(x, x); }

}  // namespace dhcn
