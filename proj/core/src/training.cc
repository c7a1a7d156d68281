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

#include "dhcn/training.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dhcn/error.h"
#include "dhcn/linalg.h"

namespace dhcn {
namespace {

double SquaredNorm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double HingeSum(const SvmModel& svm, const Matrix& maps, const LabelMatrix& labels) {
  const Matrix scores = Score(svm, maps);
  double total = 0.0;
  for (std::size_t p = 0; p < scores.rows(); ++p)
    for (std::size_t k = 0; k < scores.cols(); ++k)
      total += std::max(0.0, 1.0 - labels(p, k) * scores(p, k));
  return total;
}

void RequireFinite(double objective, std::size_t iteration, const char* phase,
                   std::size_t step) {
  if (!std::isfinite(objective)) {
    throw NumericError("objective became non-finite at iteration " +
                       std::to_string(iteration) + " (" + phase + " step " +
                       std::to_string(step) + ")");
  }
}

void ApplyUpdate(Matrix& weights, const Matrix& grad, double lr,
                 bool renormalize) {
  auto w = weights.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  if (renormalize) {
    for (double& v : w) v = std::max(v, 0.0);
    weights = RowNormalize(weights);
  }
}

}  // namespace

double GradientBundle::GeometricNorm() const {
  double s = 0.0;
  for (const auto& layer : geometric)
    for (const Matrix& m : layer) s += SquaredNorm(m);
  return std::sqrt(s);
}

double GradientBundle::SemanticNorm() const {
  double s = 0.0;
  for (const Matrix& m : semantic) s += SquaredNorm(m);
  return std::sqrt(s);
}

Matrix GradWrtFinalMap(const SvmModel& model, const Matrix& maps,
                       const LabelMatrix& labels) {
  if (labels.rows() != maps.rows() || labels.cols() != model.num_classes()) {
    throw ValidationError("grad_wrt_final_map: labels are " +
                          std::to_string(labels.rows()) + "x" +
                          std::to_string(labels.cols()) + " for maps " +
                          ShapeString(maps));
  }
  const Matrix scores = Score(model, maps);
  const std::size_t d = model.map_width();
  Matrix grad(maps.rows(), d);
  for (std::size_t p = 0; p < maps.rows(); ++p) {
    auto out = grad.row(p);
    for (std::size_t k = 0; k < model.num_classes(); ++k) {
      const int y = labels(p, k);
      if (1.0 - y * scores(p, k) <= 0.0) continue;
      const double coef = -model.c_k[k] * (y > 0 ? model.c_pos[k] : 1.0) * y;
      auto w = model.weights.row(k);
      for (std::size_t j = 0; j < d; ++j) out[j] += coef * w[j];
    }
  }
  return grad;
}

GradientBundle BackpropContexts(const LayerStack& stack,
                                const PerLayerContexts& contexts,
                                const Matrix& grad_final,
                                const DepthConfig& depth) {
  if (stack.semantic.size() != depth.sem_layers + 1 ||
      contexts.semantic.size() < depth.sem_layers ||
      contexts.geometric.size() < depth.geo_layers) {
    throw ValidationError("backprop: cached stack does not match the depth config");
  }
  if (grad_final.rows() != stack.final_maps().rows() ||
      grad_final.cols() != stack.final_maps().cols()) {
    throw ValidationError("backprop: gradient is " + ShapeString(grad_final) +
                          " but final maps are " + ShapeString(stack.final_maps()));
  }
  GradientBundle bundle;
  const std::size_t num_images = stack.pooled.rows();
  const std::size_t d_pool = stack.pooled.cols();

  // Semantic level.
  const double g2 = std::sqrt(depth.gamma2);
  Matrix grad = grad_final;
  Matrix grad_pooled(num_images, d_pool);
  bundle.semantic.resize(depth.sem_layers);
  for (std::size_t t = depth.sem_layers; t-- > 0;) {
    const Matrix& below = stack.semantic[t];
    grad_pooled = Add(grad_pooled, ColumnBlock(grad, 0, d_pool));
    const Matrix block = ColumnBlock(grad, d_pool, below.cols());
    bundle.semantic[t] =
        Hadamard(Scale(MatMulTransB(block, below), g2), contexts.semantic_mask);
    grad = Scale(MatMulTransA(contexts.semantic[t], block), g2);
  }
  grad_pooled = Add(grad_pooled, grad);

  // Geometric level, tied across images.
  const double g1 = std::sqrt(depth.gamma1);
  const std::size_t directions = contexts.num_directions();
  bundle.geometric.resize(depth.geo_layers);
  for (std::size_t t = 0; t < depth.geo_layers; ++t) {
    for (std::size_t c = 0; c < directions; ++c) {
      const Matrix& p = contexts.geometric[t][c];
      bundle.geometric[t].emplace_back(p.rows(), p.cols());
    }
  }
  for (std::size_t img = 0; img < num_images; ++img) {
    const std::vector<Matrix>& layers = stack.geometric[img];
    const std::size_t n = layers.front().rows();
    const std::size_t d0 = layers.front().cols();
    Matrix g(n, d_pool);
    for (std::size_t i = 0; i < n; ++i)
      std::copy(grad_pooled.row(img).begin(), grad_pooled.row(img).end(),
                g.row(i).begin());
    for (std::size_t t = depth.geo_layers; t-- > 0;) {
      const Matrix& below = layers[t];
      const std::size_t width = below.cols();
      Matrix next(n, width);
      for (std::size_t c = 0; c < directions; ++c) {
        const Matrix block = ColumnBlock(g, d0 + c * width, width);
        Matrix& acc = bundle.geometric[t][c];
        acc = Add(acc, Scale(MatMulTransB(block, below), g1));
        next = Add(next, Scale(MatMulTransA(contexts.geometric[t][c], block), g1));
      }
      g = std::move(next);
    }
  }
  for (std::size_t t = 0; t < depth.geo_layers; ++t)
    for (std::size_t c = 0; c < directions; ++c)
      bundle.geometric[t][c] =
          Hadamard(bundle.geometric[t][c], contexts.geometric_masks[c]);
  return bundle;
}

PreparedNetwork PrepareNetwork(const Dataset& dataset, TrainingMode mode,
                               const DepthConfig& depth,
                               const ContextOptions& context_options,
                               const InitialMapOptions& map_options,
                               std::uint64_t seed) {
  ValidateDataset(dataset);
  if (dataset.size() < 2) {
    throw ValidationError("training needs at least 2 images, got " +
                          std::to_string(dataset.size()));
  }
  if (depth.gamma1 < 0.0 || depth.gamma2 < 0.0) {
    throw ValidationError("gamma1 and gamma2 must be >= 0");
  }
  PreparedNetwork net;
  net.depth = EffectiveDepth(mode, depth);

  if (map_options.kind == InitialMapKind::kHiKpca) {
    std::vector<Matrix> cells = dataset.Features();
    if (dataset.features_are_histograms)
      for (Matrix& m : cells) m = L1NormalizeRows(m);
    const Matrix landmarks = SampleLandmarks(cells, map_options.landmarks, seed);
    net.initial_map = FitKpca(landmarks, std::min(map_options.kpca_dim, landmarks.rows()));
    net.initial_map.l1_normalize = dataset.features_are_histograms;
  }
  for (const ImageRecord& im : dataset.images)
    net.phi0.push_back(ApplyInitialMap(net.initial_map, im.features));

  const std::size_t width = net.phi0.front().cols();
  net.initial_pooled = Matrix(dataset.size(), width);
  for (std::size_t p = 0; p < dataset.size(); ++p) {
    const std::vector<double> v = Pool(net.phi0[p]);
    std::copy(v.begin(), v.end(), net.initial_pooled.row(p).begin());
  }

  const GeometricContext geometric =
      BuildGeometricContext(dataset.grid, context_options.radius);
  std::optional<SemanticContext> semantic;
  if (net.depth.sem_layers > 0) {
    if (context_options.use_semantic_links) {
      const std::vector<std::string> ids = dataset.Ids();
      const auto links = dataset.LinkPairs();
      semantic = LoadSemanticLinks(ids, links);
    } else {
      semantic = BuildSemanticAdjacency(net.initial_pooled,
                                        context_options.semantic_k,
                                        context_options.similarity);
    }
    net.semantic_k = semantic->k_neighbors;
  }
  net.contexts = MakePerLayerContexts(
      geometric, semantic ? &*semantic : nullptr, net.depth);
  return net;
}

TrainedNetwork TrainNetwork(std::span<const Matrix> phi0,
                            const LabelMatrix& labels,
                            const PerLayerContexts& initial,
                            const DepthConfig& depth, const TrainConfig& config) {
  if (config.outer_iters < 1) throw ValidationError("outer_iters must be >= 1");
  if (!(config.context_lr > 0.0)) throw ValidationError("context_lr must be > 0");
  const bool learn_geometric = (config.mode == TrainingMode::kDLCN ||
                                config.mode == TrainingMode::kDHCN) &&
                               depth.geo_layers > 0;
  const bool learn_semantic =
      config.mode == TrainingMode::kDHCN && depth.sem_layers > 0;

  TrainedNetwork best;
  best.history.best_objective = std::numeric_limits<double>::infinity();
  PerLayerContexts contexts = initial;

  const auto record = [&](const TrainLogRecord& rec, const SvmModel& svm) {
    best.history.records.push_back(rec);
    if (config.log) config.log(rec);
    if (rec.objective < best.history.best_objective) {
      best.history.best_objective = rec.objective;
      best.history.best_iteration = rec.iteration;
      best.contexts = contexts;
      best.svm = svm;
    }
  };

  for (std::size_t it = 0; it < config.outer_iters; ++it) {
    LayerStack stack = ForwardAll(phi0, contexts, depth);
    const SvmModel svm = TrainSvms(stack.final_maps(), labels, config.svm);
    TrainLogRecord rec;
    rec.iteration = it;
    rec.phase = "svm";
    rec.objective = HingeObjective(svm, stack.final_maps(), labels);
    rec.hinge = HingeSum(svm, stack.final_maps(), labels);
    RequireFinite(rec.objective, it, "svm", 0);
    record(rec, svm);
    if (!learn_geometric && !learn_semantic) break;

    for (std::size_t step = 0; step < config.context_steps; ++step) {
      const Matrix grad_final = GradWrtFinalMap(svm, stack.final_maps(), labels);
      GradientBundle bundle = BackpropContexts(stack, contexts, grad_final, depth);
      if (!learn_semantic)
        for (Matrix& m : bundle.semantic) m = Matrix(m.rows(), m.cols());
      if (!learn_geometric)
        for (auto& layer : bundle.geometric)
          for (Matrix& m : layer) m = Matrix(m.rows(), m.cols());
      const double geo_norm = bundle.GeometricNorm();
      const double sem_norm = bundle.SemanticNorm();
      double scale = 1.0;
      const double total = std::hypot(geo_norm, sem_norm);
      if (config.grad_clip && total > *config.grad_clip && total > 0.0)
        scale = *config.grad_clip / total;
      const double lr = config.context_lr * scale;
      for (std::size_t t = 0; t < depth.geo_layers; ++t)
        for (std::size_t c = 0; c < contexts.num_directions(); ++c)
          ApplyUpdate(contexts.geometric[t][c], bundle.geometric[t][c], lr,
                      config.renormalize_rows);
      for (std::size_t t = 0; t < depth.sem_layers; ++t)
        ApplyUpdate(contexts.semantic[t], bundle.semantic[t], lr,
                    config.renormalize_rows);

      stack = ForwardAll(phi0, contexts, depth);
      TrainLogRecord ctx_rec;
      ctx_rec.iteration = it;
      ctx_rec.phase = "context";
      ctx_rec.step = step;
      ctx_rec.objective = HingeObjective(svm, stack.final_maps(), labels);
      ctx_rec.hinge = HingeSum(svm, stack.final_maps(), labels);
      ctx_rec.grad_norm_geometric = geo_norm;
      ctx_rec.grad_norm_semantic = sem_norm;
      RequireFinite(ctx_rec.objective, it, "context", step);
      record(ctx_rec, svm);
    }
  }
  return best;
}

DhcnModel Train(const Dataset& dataset, const TrainConfig& config,
                const DepthConfig& depth, const ContextOptions& context_options,
                const InitialMapOptions& map_options) {
  PreparedNetwork net = PrepareNetwork(dataset, config.mode, depth, context_options,
                                       map_options, config.seed);
  const LabelMatrix labels = dataset.Labels();
  TrainedNetwork trained =
      TrainNetwork(net.phi0, labels, net.contexts, net.depth, config);

  DhcnModel model;
  model.mode = config.mode;
  model.depth = net.depth;
  model.grid = dataset.grid;
  model.radius = context_options.radius;
  model.concepts = dataset.concepts;
  model.initial_map = std::move(net.initial_map);
  model.contexts = std::move(trained.contexts);
  model.svm = std::move(trained.svm);
  model.reference.image_ids = dataset.Ids();
  model.reference.initial_pooled = std::move(net.initial_pooled);
  model.reference.pooled = ForwardAll(net.phi0, model.contexts, model.depth).pooled;
  model.reference.similarity = context_options.similarity;
  model.reference.k_neighbors = net.semantic_k;

  Provenance& prov = model.provenance;
  prov.seed = config.seed;
  prov.final_objective = trained.history.best_objective;
  prov.best_iteration = trained.history.best_iteration;
  prov.flags["mode"] = std::string(TrainingModeName(config.mode));
  prov.flags["outer_iters"] = std::to_string(config.outer_iters);
  prov.flags["lr"] = FormatDouble(config.context_lr);
  prov.flags["context_steps"] = std::to_string(config.context_steps);
  prov.flags["grad_clip"] = config.grad_clip ? FormatDouble(*config.grad_clip) : "none";
  prov.flags["renormalize_rows"] = config.renormalize_rows ? "true" : "false";
  prov.flags["svm_epochs"] = std::to_string(config.svm.epochs);
  prov.flags["svm_tol"] = FormatDouble(config.svm.tol);
  prov.flags["balance_classes"] = config.svm.balance_classes ? "true" : "false";
  prov.flags["semantic_k"] = std::to_string(context_options.semantic_k);
  prov.flags["semantic_links"] = context_options.use_semantic_links ? "true" : "false";
  prov.flags["init_map"] = std::string(InitialMapKindName(map_options.kind));
  prov.flags["gamma1"] = FormatDouble(depth.gamma1);
  prov.flags["gamma2"] = FormatDouble(depth.gamma2);
  prov.flags["geo_layers"] = std::to_string(depth.geo_layers);
  prov.flags["sem_layers"] = std::to_string(depth.sem_layers);
  return model;
}

namespace {

struct LossEval {
  double value = 0.0;
  std::vector<bool> active;
};

LossEval EvaluateLoss(std::span<const Matrix> phi0, const LabelMatrix& labels,
                      const PerLayerContexts& contexts, const DepthConfig& depth,
                      const SvmModel& svm, GradcheckLoss loss) {
  const LayerStack stack = ForwardAll(phi0, contexts, depth);
  const Matrix& maps = stack.final_maps();
  LossEval out;
  if (loss == GradcheckLoss::kQuadratic) {
    out.value = 0.5 * SquaredNorm(maps);
    return out;
  }
  out.value = HingeObjective(svm, maps, labels);
  const Matrix scores = Score(svm, maps);
  for (std::size_t p = 0; p < scores.rows(); ++p)
    for (std::size_t k = 0; k < scores.cols(); ++k)
      out.active.push_back(1.0 - labels(p, k) * scores(p, k) > 0.0);
  return out;
}

// Relative error with a floor on the denominator. The floor sits at ten times
// the round-off level of a central difference, divided by the tolerance, so
// gradients too small to resolve numerically are compared in absolute terms.
double RelError(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

GradcheckReport Gradcheck(std::span<const Matrix> phi0, const LabelMatrix& labels,
                          const PerLayerContexts& contexts,
                          const DepthConfig& depth, std::uint64_t seed,
                          GradcheckLoss loss, double step, double tolerance) {
  GradcheckReport report;
  report.tolerance = tolerance;
  const LayerStack stack = ForwardAll(phi0, contexts, depth);
  const Matrix& maps = stack.final_maps();
  const std::size_t d = maps.cols();
  const std::size_t num_classes = labels.cols();

  // Random SVM with scores of unit spread.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SvmModel svm;
  svm.weights = Matrix(num_classes, d + 1);
  svm.c_k.assign(num_classes, 1.0);
  svm.c_pos.assign(num_classes, 1.0);
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto w = svm.weights.row(k);
    for (std::size_t j = 0; j < d; ++j) w[j] = normal(rng);
    double mean = 0.0;
    double sq = 0.0;
    for (std::size_t p = 0; p < maps.rows(); ++p) {
      const double s = Dot(w.first(d), maps.row(p));
      mean += s;
      sq += s * s;
    }
    const double count = static_cast<double>(std::max<std::size_t>(maps.rows(), 1));
    mean /= count;
    const double spread = std::sqrt(std::max(sq / count - mean * mean, 0.0));
    const double scale = spread > 0.0 ? 1.0 / spread : 1.0;
    for (std::size_t j = 0; j < d; ++j) w[j] *= scale;
    w[d] = 1.0 - mean * scale + 0.5 * normal(rng);
  }

  const Matrix grad_final = loss == GradcheckLoss::kQuadratic
                                ? maps
                                : GradWrtFinalMap(svm, maps, labels);
  const GradientBundle analytic = BackpropContexts(stack, contexts, grad_final, depth);
  const LossEval base = EvaluateLoss(phi0, labels, contexts, depth, svm, loss);
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(base.value)) / (step * tolerance);

  const auto check = [&](Matrix& target, std::size_t i, std::size_t j,
                         PerLayerContexts& ctx, const SvmModel& model,
                         double analytic_value, const std::string& name,
                         bool svm_entry) {
    const double saved = target(i, j);
    target(i, j) = saved + step;
    const LossEval plus = EvaluateLoss(phi0, labels, ctx, depth, model, loss);
    target(i, j) = saved - step;
    const LossEval minus = EvaluateLoss(phi0, labels, ctx, depth, model, loss);
    target(i, j) = saved;
    if (plus.active != base.active || minus.active != base.active) {
      ++report.excluded_ties;
      return;
    }
    const double numeric = (plus.value - minus.value) / (2.0 * step);
    const double err = RelError(analytic_value, numeric, floor);
    if (svm_entry) {
      ++report.checked_svm;
      report.max_rel_error_svm = std::max(report.max_rel_error_svm, err);
    } else {
      ++report.checked;
    }
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_entry = name;
    }
  };

  PerLayerContexts work = contexts;
  for (std::size_t t = 0; t < depth.geo_layers; ++t) {
    for (std::size_t c = 0; c < work.num_directions(); ++c) {
      const BoolMatrix& mask = work.geometric_masks[c];
      for (std::size_t i = 0; i < mask.rows(); ++i)
        for (std::size_t j = 0; j < mask.cols(); ++j) {
          if (!mask(i, j)) continue;
          check(work.geometric[t][c], i, j, work, svm, analytic.geometric[t][c](i, j),
                "geometric[" + std::to_string(t) + "][" + std::to_string(c) +
                    "](" + std::to_string(i) + "," + std::to_string(j) + ")",
                false);
        }
    }
  }
  for (std::size_t t = 0; t < depth.sem_layers; ++t) {
    const BoolMatrix& mask = work.semantic_mask;
    for (std::size_t i = 0; i < mask.rows(); ++i)
      for (std::size_t j = 0; j < mask.cols(); ++j) {
        if (!mask(i, j)) continue;
        check(work.semantic[t], i, j, work, svm, analytic.semantic[t](i, j),
              "semantic[" + std::to_string(t) + "](" + std::to_string(i) + "," +
                  std::to_string(j) + ")",
              false);
      }
  }

  if (loss == GradcheckLoss::kHinge) {
    // dE/dw_k = w_k - C_k sum_p cost Y [x_p; 1] over active hinges.
    const Matrix scores = Score(svm, maps);
    Matrix grad_w(num_classes, d + 1);
    for (std::size_t k = 0; k < num_classes; ++k) {
      auto g = grad_w.row(k);
      auto w = svm.weights.row(k);
      for (std::size_t j = 0; j < d; ++j) g[j] = w[j];
      for (std::size_t p = 0; p < maps.rows(); ++p) {
        const int y = labels(p, k);
        if (1.0 - y * scores(p, k) <= 0.0) continue;
        const double coef = -svm.c_k[k] * y;
        for (std::size_t j = 0; j < d; ++j) g[j] += coef * maps(p, j);
        g[d] += coef;
      }
    }
    const std::size_t total = num_classes * (d + 1);
    std::vector<std::size_t> coords(total);
    std::iota(coords.begin(), coords.end(), 0);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(std::max<std::size_t>(1, total / 10));
    std::sort(coords.begin(), coords.end());
    SvmModel perturbed = svm;
    for (std::size_t idx : coords) {
      const std::size_t k = idx / (d + 1);
      const std::size_t j = idx % (d + 1);
      check(perturbed.weights, k, j, work, perturbed, grad_w(k, j),
            "svm[" + std::to_string(k) + "](" + std::to_string(j) + ")", true);
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

GradcheckReport Gradcheck(const Dataset& dataset, const DepthConfig& depth,
                          const ContextOptions& context_options,
                          std::uint64_t seed, GradcheckLoss loss) {
  const PreparedNetwork net = PrepareNetwork(dataset, TrainingMode::kDHCN, depth,
                                             context_options, InitialMapOptions{},
                                             seed);
  const double tolerance = loss == GradcheckLoss::kQuadratic ? 1e-7 : 1e-4;
  return Gradcheck(net.phi0, dataset.Labels(), net.contexts, net.depth, seed, loss,
                   1e-5, tolerance);
}

}  // namespace dhcn
