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

#include "dhcn/svm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dhcn/error.h"
#include "dhcn/linalg.h"
#include "dhcn/network.h"

namespace dhcn {
namespace {

constexpr double kTau = 1e-12;

void RequireCompatible(const SvmModel& model, const Matrix& maps) {
  if (model.map_width() != maps.cols()) {
    throw ValidationError("svm: model expects maps of width " +
                          std::to_string(model.map_width()) + ", got " +
                          ShapeString(maps));
  }
}

struct BinaryProblem {
  const Matrix& kernel;            // P x P, x_i . x_j
  std::vector<int> y;              // +-1
  std::vector<double> upper;       // per-sample box
};

struct BinarySolution {
  std::vector<double> alpha;
  double bias = 0.0;
};

// Maximizes sum(alpha) - 1/2 alpha' Q alpha subject to 0 <= alpha <= upper and
// y' alpha = 0, with Q_ij = y_i y_j K_ij, by maximal-violating-pair updates.
// G holds the gradient of the minimization form, Q alpha - 1.
BinarySolution SolveBinary(const BinaryProblem& prob, const SvmOptions& options,
                           BinarySvmTrace* trace) {
  const std::size_t n = prob.y.size();
  const auto q = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(prob.y[i] * prob.y[j]) * prob.kernel(i, j);
  };
  BinarySolution sol{std::vector<double>(n, 0.0), 0.0};
  std::vector<double>& alpha = sol.alpha;
  std::vector<double> grad(n, -1.0);

  const auto in_up = [&](std::size_t t) {
    return prob.y[t] > 0 ? alpha[t] < prob.upper[t] : alpha[t] > 0.0;
  };
  const auto in_low = [&](std::size_t t) {
    return prob.y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < prob.upper[t];
  };
  const auto dual_value = [&] {
    double d = 0.0;
    for (std::size_t t = 0; t < n; ++t) d += alpha[t] * (1.0 - grad[t]);
    return 0.5 * d;
  };

  bool converged = false;
  std::size_t pass = 0;
  for (; pass < options.epochs && !converged; ++pass) {
    double max_change = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
      double m = -std::numeric_limits<double>::infinity();
      double big_m = std::numeric_limits<double>::infinity();
      std::size_t i = n;
      std::size_t j = n;
      for (std::size_t t = 0; t < n; ++t) {
        const double v = -prob.y[t] * grad[t];
        if (in_up(t) && v > m) {
          m = v;
          i = t;
        }
        if (in_low(t) && v < big_m) {
          big_m = v;
          j = t;
        }
      }
      if (i == n || j == n || m - big_m < options.tol) {
        converged = true;
        break;
      }

      const double ci = prob.upper[i];
      const double cj = prob.upper[j];
      const double old_i = alpha[i];
      const double old_j = alpha[j];
      double& ai = alpha[i];
      double& aj = alpha[j];
      if (prob.y[i] != prob.y[j]) {
        double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double delta = (-grad[i] - grad[j]) / quad;
        const double diff = ai - aj;
        ai += delta;
        aj += delta;
        if (diff > 0.0) {
          if (aj < 0.0) {
            aj = 0.0;
            ai = diff;
          }
        } else if (ai < 0.0) {
          ai = 0.0;
          aj = -diff;
        }
        if (diff > ci - cj) {
          if (ai > ci) {
            ai = ci;
            aj = ci - diff;
          }
        } else if (aj > cj) {
          aj = cj;
          ai = cj + diff;
        }
      } else {
        double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double delta = (grad[i] - grad[j]) / quad;
        const double sum = ai + aj;
        ai -= delta;
        aj += delta;
        if (sum > ci) {
          if (ai > ci) {
            ai = ci;
            aj = sum - ci;
          }
        } else if (aj < 0.0) {
          aj = 0.0;
          ai = sum;
        }
        if (sum > cj) {
          if (aj > cj) {
            aj = cj;
            ai = sum - cj;
          }
        } else if (ai < 0.0) {
          ai = 0.0;
          aj = sum;
        }
      }

      const double di = ai - old_i;
      const double dj = aj - old_j;
      max_change = std::max({max_change, std::abs(di), std::abs(dj)});
      for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
    }
    if (trace != nullptr) trace->dual_per_pass.push_back(dual_value());
    if (!converged && max_change < options.tol) converged = true;
  }

  // Bias from the KKT conditions: average over free vectors, otherwise the
  // midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = prob.y[t] * grad[t];
    const bool at_upper = alpha[t] >= prob.upper[t];
    const bool at_lower = alpha[t] <= 0.0;
    if (at_upper) {
      if (prob.y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower) {
      if (prob.y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else if (std::isfinite(ub)) {
    rho = ub;
  } else if (std::isfinite(lb)) {
    rho = lb;
  }
  sol.bias = -rho;
  if (trace != nullptr) {
    trace->passes = pass;
    trace->converged = converged;
  }
  return sol;
}

}  // namespace

LabelMatrix LabelMatrix::FromTruth(const BoolMatrix& truth) {
  LabelMatrix out(truth.rows(), truth.cols());
  for (std::size_t p = 0; p < truth.rows(); ++p)
    for (std::size_t k = 0; k < truth.cols(); ++k) out.set(p, k, truth(p, k));
  return out;
}

BoolMatrix LabelMatrix::ToTruth() const {
  BoolMatrix out(rows_, cols_);
  for (std::size_t p = 0; p < rows_; ++p)
    for (std::size_t k = 0; k < cols_; ++k) out.set(p, k, (*this)(p, k) > 0);
  return out;
}

double HingeObjective(const SvmModel& model, const Matrix& maps,
                      const LabelMatrix& labels) {
  RequireCompatible(model, maps);
  if (labels.rows() != maps.rows() || labels.cols() != model.num_classes()) {
    throw ValidationError("hinge_objective: labels are " +
                          std::to_string(labels.rows()) + "x" +
                          std::to_string(labels.cols()) + " for " +
                          std::to_string(maps.rows()) + " maps and " +
                          std::to_string(model.num_classes()) + " classes");
  }
  const Matrix scores = Score(model, maps);
  const std::size_t d = model.map_width();
  double total = 0.0;
  for (std::size_t k = 0; k < model.num_classes(); ++k) {
    const auto w = model.weights.row(k).first(d);
    double hinge = 0.0;
    for (std::size_t p = 0; p < maps.rows(); ++p) {
      const int y = labels(p, k);
      const double slack = 1.0 - y * scores(p, k);
      if (slack > 0.0) hinge += (y > 0 ? model.c_pos[k] : 1.0) * slack;
    }
    total += 0.5 * Dot(w, w) + model.c_k[k] * hinge;
  }
  return total;
}

SvmModel TrainSvms(const Matrix& maps, const LabelMatrix& labels,
                   const SvmOptions& options,
                   std::vector<BinarySvmTrace>* traces) {
  const std::size_t num_images = maps.rows();
  const std::size_t num_classes = labels.cols();
  if (num_images < 2) throw ValidationError("train_svms: need at least 2 images");
  if (labels.rows() != num_images) {
    throw ValidationError("train_svms: " + std::to_string(labels.rows()) +
                          " label rows for " + std::to_string(num_images) +
                          " maps");
  }
  if (!AllFinite(maps)) throw NumericError("train_svms: non-finite feature value");
  if (options.c.size() != 1 && options.c.size() != num_classes) {
    throw ValidationError("train_svms: expected 1 or " +
                          std::to_string(num_classes) + " C values, got " +
                          std::to_string(options.c.size()));
  }
  for (double c : options.c)
    if (!(c > 0.0)) throw ValidationError("train_svms: C must be positive");

  const std::size_t d = maps.cols();
  SvmModel model;
  model.weights = Matrix(num_classes, d + 1);
  model.c_k.resize(num_classes);
  model.c_pos.assign(num_classes, 1.0);
  if (traces != nullptr) traces->assign(num_classes, {});

  const Matrix kernel = Gram(maps);
  for (std::size_t k = 0; k < num_classes; ++k) {
    model.c_k[k] = options.c.size() == 1 ? options.c[0] : options.c[k];
    BinaryProblem prob{kernel, std::vector<int>(num_images), std::vector<double>(num_images)};
    std::size_t positives = 0;
    for (std::size_t p = 0; p < num_images; ++p) {
      prob.y[p] = labels(p, k);
      if (prob.y[p] > 0) ++positives;
    }
    if (options.balance_classes && positives > 0) {
      model.c_pos[k] = static_cast<double>(num_images - positives) /
                       static_cast<double>(positives);
      if (model.c_pos[k] == 0.0) model.c_pos[k] = 1.0;
    }
    for (std::size_t p = 0; p < num_images; ++p)
      prob.upper[p] = model.SampleCost(k, prob.y[p]);

    BinarySvmTrace* trace = traces != nullptr ? &(*traces)[k] : nullptr;
    const BinarySolution sol = SolveBinary(prob, options, trace);

    auto w = model.weights.row(k);
    for (std::size_t p = 0; p < num_images; ++p) {
      const double coef = sol.alpha[p] * prob.y[p];
      if (coef == 0.0) continue;
      auto x = maps.row(p);
      for (std::size_t j = 0; j < d; ++j) w[j] += coef * x[j];
    }
    w[d] = sol.bias;

    if (trace != nullptr) {
      const double wnorm2 = Dot(w.first(d), w.first(d));
      double alpha_sum = 0.0;
      double hinge = 0.0;
      for (std::size_t p = 0; p < num_images; ++p) {
        alpha_sum += sol.alpha[p];
        const double slack =
            1.0 - prob.y[p] * (Dot(w.first(d), maps.row(p)) + w[d]);
        if (slack > 0.0) hinge += prob.upper[p] * slack;
      }
      trace->primal = 0.5 * wnorm2 + hinge;
      trace->dual = alpha_sum - 0.5 * wnorm2;
    }
  }
  return model;
}

Matrix Score(const SvmModel& model, const Matrix& maps) {
  RequireCompatible(model, maps);
  const std::size_t d = model.map_width();
  Matrix scores(maps.rows(), model.num_classes());
  for (std::size_t p = 0; p < maps.rows(); ++p)
    for (std::size_t k = 0; k < model.num_classes(); ++k) {
      auto w = model.weights.row(k);
      scores(p, k) = Dot(w.first(d), maps.row(p)) + w[d];
    }
  return scores;
}

BoolMatrix Decide(const Matrix& scores) {
  BoolMatrix out(scores.rows(), scores.cols());
  for (std::size_t p = 0; p < scores.rows(); ++p)
    for (std::size_t k = 0; k < scores.cols(); ++k) out.set(p, k, scores(p, k) > 0.0);
  return out;
}

}  // namespace dhcn
