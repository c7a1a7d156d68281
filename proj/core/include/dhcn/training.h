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

#ifndef DHCN_TRAINING_H_
#define DHCN_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhcn/context_graph.h"
#include "dhcn/dataset.h"
#include "dhcn/feature_maps.h"
#include "dhcn/model.h"
#include "dhcn/network.h"
#include "dhcn/svm.h"

namespace dhcn {

// How the neighbourhood systems are built from a dataset.
struct ContextOptions {
  double radius = 1.0;
  std::size_t semantic_k = 10;
  Similarity similarity = Similarity::kCosine;
  // Use the manifest's semantic_links instead of a kNN graph.
  bool use_semantic_links = false;
};

struct InitialMapOptions {
  InitialMapKind kind = InitialMapKind::kLinear;
  std::size_t kpca_dim = 64;
  std::size_t landmarks = 256;
};

// One line of the training log.
struct TrainLogRecord {
  std::size_t iteration = 0;
  std::string phase;  // "svm" or "context"
  std::size_t step = 0;
  double objective = 0.0;
  double hinge = 0.0;
  double grad_norm_geometric = 0.0;
  double grad_norm_semantic = 0.0;
};

struct TrainConfig {
  TrainingMode mode = TrainingMode::kDHCN;
  std::size_t outer_iters = 100;
  double context_lr = 1e-3;
  std::size_t context_steps = 1;
  std::optional<double> grad_clip;
  std::uint64_t seed = 0;
  // Clamp negative context weights to zero and re-normalize rows after each
  // update.
  bool renormalize_rows = false;
  SvmOptions svm;
  std::function<void(const TrainLogRecord&)> log;
};

// Gradients of the loss with respect to every context matrix, masked to the
// supports.
struct GradientBundle {
  std::vector<std::vector<Matrix>> geometric;  // [layer][direction]
  std::vector<Matrix> semantic;                // [layer]
  double loss = 0.0;

  double GeometricNorm() const;
  double SemanticNorm() const;
};

// dE/dPhi_I(I_p) = -sum_k C_k cost_pk Y_k^p w_k [1 - Y_k^p f_k(p) > 0], one
// row per image, bias coordinate dropped.
Matrix GradWrtFinalMap(const SvmModel& model, const Matrix& maps,
                       const LabelMatrix& labels);

// Chain rule from the final maps back through the semantic layers, pooling
// and the geometric layers. Geometric gradients are summed over images.
GradientBundle BackpropContexts(const LayerStack& stack,
                                const PerLayerContexts& contexts,
                                const Matrix& grad_final,
                                const DepthConfig& depth);

// Everything derived from a dataset before optimization starts.
struct PreparedNetwork {
  DepthConfig depth;  // effective
  InitialMapSpec initial_map;
  std::vector<Matrix> phi0;
  Matrix initial_pooled;
  PerLayerContexts contexts;
  std::size_t semantic_k = 0;
};

PreparedNetwork PrepareNetwork(const Dataset& dataset, TrainingMode mode,
                               const DepthConfig& depth,
                               const ContextOptions& context_options,
                               const InitialMapOptions& map_options,
                               std::uint64_t seed);

struct TrainHistory {
  std::vector<TrainLogRecord> records;
  std::size_t best_iteration = 0;
  double best_objective = 0.0;
};

struct TrainedNetwork {
  PerLayerContexts contexts;
  SvmModel svm;
  TrainHistory history;
};

// Alternating optimization: fit the SVMs at fixed contexts, then take
// `context_steps` gradient steps on the contexts at fixed SVMs. Returns the
// (contexts, SVM) pair with the lowest recorded objective.
TrainedNetwork TrainNetwork(std::span<const Matrix> phi0,
                            const LabelMatrix& labels,
                            const PerLayerContexts& initial,
                            const DepthConfig& depth, const TrainConfig& config);

// Builds the network from `dataset`, trains it and packages the model.
DhcnModel Train(const Dataset& dataset, const TrainConfig& config,
                const DepthConfig& depth, const ContextOptions& context_options,
                const InitialMapOptions& map_options);

enum class GradcheckLoss {
  kHinge,      // the SVM objective
  kQuadratic,  // 1/2 ||Phi_final||^2, margins ignored
};

struct GradcheckReport {
  std::size_t checked = 0;
  std::size_t excluded_ties = 0;
  std::size_t checked_svm = 0;
  double max_rel_error = 0.0;
  double max_rel_error_svm = 0.0;
  std::string worst_entry;
  double tolerance = 1e-4;
  bool passed = false;
};

// Central finite differences (step `step`) against the analytic gradients over
// every supported context entry and, for the hinge loss, a random 10% of SVM
// weight coordinates. SVM weights are drawn at random from `seed` so that
// margins sit away from the hinge. Entries whose perturbation flips any
// hinge are counted as ties and skipped. The relative error uses
// max(|analytic|, |numeric|, floor) as denominator, where the floor is ten
// times the central-difference round-off (eps * |loss| / step) over the
// tolerance.
GradcheckReport Gradcheck(std::span<const Matrix> phi0, const LabelMatrix& labels,
                          const PerLayerContexts& contexts,
                          const DepthConfig& depth, std::uint64_t seed,
                          GradcheckLoss loss, double step = 1e-5,
                          double tolerance = 1e-4);

GradcheckReport Gradcheck(const Dataset& dataset, const DepthConfig& depth,
                          const ContextOptions& context_options,
                          std::uint64_t seed, GradcheckLoss loss);

}  // namespace dhcn

#endif  // DHCN_TRAINING_H_
