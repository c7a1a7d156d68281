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

#ifndef DHCN_NETWORK_H_
#define DHCN_NETWORK_H_

#include <cstddef>
#include <span>
#include <vector>

#include "dhcn/context_graph.h"
#include "dhcn/matrix.h"

namespace dhcn {

// Depth and context strengths of the unfolded network. The context blocks of
// each layer are scaled by sqrt(gamma).
struct DepthConfig {
  std::size_t geo_layers = 2;
  std::size_t sem_layers = 2;
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  bool operator==(const DepthConfig&) const = default;
};

// Untied per-layer context weights sharing one support per direction.
//   geometric[t][c] : n x n, layer t, direction c
//   semantic[t]     : P x P, layer t
struct PerLayerContexts {
  std::vector<std::vector<Matrix>> geometric;
  std::vector<BoolMatrix> geometric_masks;
  std::vector<Matrix> semantic;
  BoolMatrix semantic_mask;

  std::size_t num_directions() const { return geometric_masks.size(); }
  bool operator==(const PerLayerContexts&) const = default;
};

// Replicates the initial matrices over the layers of `depth`. `semantic` may be
// null when depth.sem_layers == 0.
PerLayerContexts MakePerLayerContexts(const GeometricContext& geometric,
                                      const SemanticContext* semantic,
                                      const DepthConfig& depth);

// Column widths of the geometric layers: d_{t+1} = d0 + C * d_t.
std::size_t GeometricWidth(std::size_t d0, std::size_t directions,
                           std::size_t layer);
// Column widths of the semantic layers: d_{t+1} = d_pool + d_t.
std::size_t SemanticWidth(std::size_t d_pool, std::size_t layer);

// Phi^(t+1) = [Phi^(0), g P_1^(t) Phi^(t), ..., g P_C^(t) Phi^(t)] with
// g = sqrt(gamma1). Returns Phi^(0)..Phi^(T1).
std::vector<Matrix> ForwardGeometric(const Matrix& phi0,
                                     const PerLayerContexts& contexts,
                                     const DepthConfig& depth);

// Column-wise sum over the cell rows.
std::vector<double> Pool(const Matrix& activations);

// Phi_I^(t+1) = [Phi_I^(0), g P_I^(t) Phi_I^(t)] with g = sqrt(gamma2) and
// Phi_I^(0) = pooled. Returns all T2 + 1 layers.
std::vector<Matrix> ForwardSemantic(const Matrix& pooled,
                                    const PerLayerContexts& contexts,
                                    const DepthConfig& depth);

// Cached activations of a whole-dataset forward pass.
struct LayerStack {
  std::vector<std::vector<Matrix>> geometric;  // [image][layer]
  Matrix pooled;                               // P x d_{T1}
  std::vector<Matrix> semantic;                // [layer], P x d_t

  const Matrix& final_maps() const { return semantic.back(); }
};

LayerStack ForwardAll(std::span<const Matrix> phi0_per_image,
                      const PerLayerContexts& contexts,
                      const DepthConfig& depth);

// K^(t+1) = S + gamma1 sum_c P_c^(t) K^(t) P_c^(t)', run for T1 steps from S.
Matrix FixedPointKernelGeo(const Matrix& s, const PerLayerContexts& contexts,
                           const DepthConfig& depth);

// K^(t+1) = S~ + gamma2 P_I^(t) K^(t) P_I^(t)', run for T2 steps from S~.
Matrix FixedPointKernelSem(const Matrix& s_tilde,
                           const PerLayerContexts& contexts,
                           const DepthConfig& depth);

// tr(-K S') - alpha1 sum_c tr(K P_c K' P_c') + beta1/2 ||K||^2. Diagnostic.
double ObjectiveGeo(const Matrix& k, const Matrix& s,
                    std::span<const Matrix> directions, double alpha1,
                    double beta1);

// tr(-K S~') - alpha2 tr(K P K' P') + beta2/2 ||K||^2. Diagnostic.
double ObjectiveSem(const Matrix& k, const Matrix& s_tilde, const Matrix& p_i,
                    double alpha2, double beta2);

// X X'.
Matrix Gram(const Matrix& x);

}  // namespace dhcn

#endif  // DHCN_NETWORK_H_
