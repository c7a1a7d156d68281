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

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dhcn/dataset.h"
#include "dhcn/error.h"
#include "dhcn/metrics.h"
#include "dhcn/model.h"
#include "dhcn/model_io.h"
#include "dhcn/synthetic.h"
#include "dhcn/training.h"

namespace dhcn::cli {
namespace {

using json = nlohmann::json;

struct NetworkFlags {
  double radius = 1.0;
  std::size_t semantic_k = 10;
  bool semantic_links = false;
  std::string similarity = "cosine";
  std::size_t geo_layers = 2;
  std::size_t sem_layers = 2;
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  void Register(CLI::App& app) {
    app.add_option("--radius", radius, "Geometric neighbourhood radius in cells")
        ->capture_default_str();
    app.add_option("--semantic-k", semantic_k, "Semantic neighbours per image")
        ->capture_default_str();
    app.add_flag("--semantic-links", semantic_links,
                 "Use the manifest's semantic_links instead of kNN");
    app.add_option("--similarity", similarity, "kNN similarity")
        ->check(CLI::IsMember({"cosine", "dot"}))
        ->capture_default_str();
    app.add_option("--geo-layers", geo_layers, "Geometric context layers T1")
        ->capture_default_str();
    app.add_option("--sem-layers", sem_layers, "Semantic context layers T2")
        ->capture_default_str();
    app.add_option("--gamma1", gamma1, "Geometric context weight")->capture_default_str();
    app.add_option("--gamma2", gamma2, "Semantic context weight")->capture_default_str();
  }

  DepthConfig Depth() const { return {geo_layers, sem_layers, gamma1, gamma2}; }

  ContextOptions Contexts() const {
    ContextOptions o;
    o.radius = radius;
    o.semantic_k = semantic_k;
    o.similarity = ParseSimilarity(similarity);
    o.use_semantic_links = semantic_links;
    return o;
  }
};

// Writes `text` to `path`, or to `out` when the path is empty or "-".
void Emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError(path + ": cannot open for writing");
  file << text;
  if (!file) throw ValidationError(path + ": write failed");
}

json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json LogRecordJson(const TrainLogRecord& r) {
  return {{"iteration", r.iteration},
          {"phase", r.phase},
          {"step", r.step},
          {"objective", r.objective},
          {"hinge", r.hinge},
          {"grad_norm_geometric", r.grad_norm_geometric},
          {"grad_norm_semantic", r.grad_norm_semantic}};
}

void AddTrain(CLI::App& app, std::ostream& out, std::ostream& err) {
  auto* cmd = app.add_subcommand("train", "Train a model on a manifest");
  auto manifest = std::make_shared<std::string>();
  auto model_out = std::make_shared<std::string>();
  auto log_path = std::make_shared<std::string>();
  auto net = std::make_shared<NetworkFlags>();
  auto mode = std::make_shared<std::string>("dhcn");
  auto init_map = std::make_shared<std::string>("linear");
  auto kpca_dim = std::make_shared<std::size_t>(64);
  auto landmarks = std::make_shared<std::size_t>(256);
  auto svm_c = std::make_shared<std::vector<double>>(std::vector<double>{1.0});
  auto balance = std::make_shared<bool>(false);
  auto epochs = std::make_shared<std::size_t>(1000);
  auto svm_tol = std::make_shared<double>(1e-6);
  auto lr = std::make_shared<double>(1e-3);
  auto context_steps = std::make_shared<std::size_t>(1);
  auto outer_iters = std::make_shared<std::size_t>(100);
  auto grad_clip = std::make_shared<double>(0.0);
  auto renormalize = std::make_shared<bool>(false);
  auto seed = std::make_shared<std::uint64_t>(0);

  cmd->add_option("--manifest", *manifest, "Dataset manifest (JSON)")->required();
  cmd->add_option("--out", *model_out, "Output model file")->required();
  cmd->add_option("--log", *log_path, "Line-delimited JSON training log ('-' for stderr)");
  cmd->add_option("--mode", *mode, "Ablation mode")
      ->check(CLI::IsMember({"cf", "dfcn", "dlcn", "dhcn"}))
      ->capture_default_str();
  net->Register(*cmd);
  cmd->add_option("--init-map", *init_map, "Initial cell map")
      ->check(CLI::IsMember({"linear", "hi-kpca"}))
      ->capture_default_str();
  cmd->add_option("--kpca-dim", *kpca_dim, "KPCA output dimension")->capture_default_str();
  cmd->add_option("--landmarks", *landmarks, "KPCA landmark count")->capture_default_str();
  cmd->add_option("--svm-c", *svm_c, "SVM C (one value, or one per concept)")
      ->capture_default_str();
  cmd->add_flag("--balance-classes", *balance, "Scale positive penalty by #neg/#pos");
  cmd->add_option("--epochs", *epochs, "SVM solver passes")->capture_default_str();
  cmd->add_option("--svm-tol", *svm_tol, "SVM stopping tolerance")->capture_default_str();
  cmd->add_option("--lr", *lr, "Context learning rate")->capture_default_str();
  cmd->add_option("--context-steps", *context_steps, "Gradient steps per outer iteration")
      ->capture_default_str();
  cmd->add_option("--outer-iters", *outer_iters, "Alternating rounds")->capture_default_str();
  cmd->add_option("--grad-clip", *grad_clip, "Global gradient norm clip (0 = off)");
  cmd->add_flag("--renormalize-rows", *renormalize,
                "Clamp negatives and re-normalize context rows after each step");
  cmd->add_option("--seed", *seed, "Random seed")->capture_default_str();

  cmd->callback([=, &out, &err] {
    const Dataset dataset = LoadDataset(*manifest);
    TrainConfig config;
    config.mode = ParseTrainingMode(*mode);
    config.outer_iters = *outer_iters;
    config.context_lr = *lr;
    config.context_steps = *context_steps;
    if (*grad_clip > 0.0) config.grad_clip = *grad_clip;
    config.seed = *seed;
    config.renormalize_rows = *renormalize;
    config.svm.c = *svm_c;
    config.svm.balance_classes = *balance;
    config.svm.epochs = *epochs;
    config.svm.tol = *svm_tol;

    std::ofstream log_file;
    std::ostream* log_stream = nullptr;
    if (*log_path == "-") {
      log_stream = &err;
    } else if (!log_path->empty()) {
      log_file.open(*log_path);
      if (!log_file) throw ValidationError(*log_path + ": cannot open for writing");
      log_stream = &log_file;
    }
    if (log_stream != nullptr) {
      config.log = [log_stream](const TrainLogRecord& r) {
        *log_stream << LogRecordJson(r).dump() << '\n';
      };
    }

    InitialMapOptions map_options;
    map_options.kind = ParseInitialMapKind(*init_map);
    map_options.kpca_dim = *kpca_dim;
    map_options.landmarks = *landmarks;

    const DhcnModel model =
        Train(dataset, config, net->Depth(), net->Contexts(), map_options);
    SaveModel(model, *model_out);
    out << json{{"model", *model_out},
                {"mode", std::string(TrainingModeName(model.mode))},
                {"objective", model.provenance.final_objective},
                {"best_iteration", model.provenance.best_iteration}}
               .dump()
        << '\n';
  });
}

void AddPredict(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("predict", "Score the images of a manifest");
  auto model_path = std::make_shared<std::string>();
  auto manifest = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  cmd->add_option("--model", *model_path, "Model file")->required();
  cmd->add_option("--manifest", *manifest, "Dataset manifest")->required();
  cmd->add_option("--out", *out_path, "Output predictions (default stdout)");

  cmd->callback([=, &out] {
    const DhcnModel model = LoadModel(*model_path);
    const Dataset dataset = LoadDataset(*manifest);
    if (dataset.grid != model.grid) {
      throw ValidationError("manifest grid does not match the model grid");
    }
    const Matrix scores = PredictScores(model, dataset.images);
    const BoolMatrix decisions = Decide(scores);
    json images = json::array();
    for (std::size_t p = 0; p < dataset.size(); ++p) {
      json keywords = json::array();
      json row = json::array();
      for (std::size_t k = 0; k < model.concepts.size(); ++k) {
        if (decisions(p, k)) keywords.push_back(model.concepts[k]);
        row.push_back(scores(p, k));
      }
      images.push_back({{"id", dataset.images[p].id},
                        {"keywords", std::move(keywords)},
                        {"scores", std::move(row)}});
    }
    json doc = {{"concepts", model.concepts}, {"images", std::move(images)}};
    Emit(*out_path, doc.dump(1) + "\n", out);
  });
}

void AddEvaluate(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("evaluate", "Compare predictions against a manifest");
  auto predictions = std::make_shared<std::string>();
  auto manifest = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  cmd->add_option("--predictions", *predictions, "Output of `predict`")->required();
  cmd->add_option("--manifest", *manifest, "Dataset manifest with ground truth")->required();
  cmd->add_option("--out", *out_path, "Output report (default stdout)");

  cmd->callback([=, &out] {
    const Dataset dataset = LoadDataset(*manifest);
    const json doc = ReadJson(*predictions);
    std::vector<std::string> concepts;
    std::map<std::string, const json*> by_id;
    try {
      concepts = doc.at("concepts").get<std::vector<std::string>>();
      for (const auto& im : doc.at("images")) by_id[im.at("id").get<std::string>()] = &im;
    } catch (const json::exception& e) {
      throw ValidationError(*predictions + ": " + e.what());
    }
    if (concepts != dataset.concepts) {
      throw ValidationError("concept lists differ between predictions and manifest");
    }
    const std::size_t k_count = concepts.size();
    Matrix scores(dataset.size(), k_count);
    BoolMatrix pred(dataset.size(), k_count);
    for (std::size_t p = 0; p < dataset.size(); ++p) {
      const auto it = by_id.find(dataset.images[p].id);
      if (it == by_id.end()) {
        throw ValidationError("no prediction for image '" + dataset.images[p].id + "'");
      }
      try {
        const auto row = it->second->at("scores").get<std::vector<double>>();
        if (row.size() != k_count) {
          throw ValidationError("image '" + dataset.images[p].id + "': expected " +
                                std::to_string(k_count) + " scores");
        }
        std::copy(row.begin(), row.end(), scores.row(p).begin());
        for (const auto& kw : it->second->at("keywords")) {
          const auto c = std::find(concepts.begin(), concepts.end(), kw.get<std::string>());
          if (c == concepts.end()) {
            throw ValidationError("image '" + dataset.images[p].id +
                                  "': unknown keyword '" + kw.get<std::string>() + "'");
          }
          pred.set(p, static_cast<std::size_t>(c - concepts.begin()), true);
        }
      } catch (const json::exception& e) {
        throw ValidationError(*predictions + ": " + e.what());
      }
    }
    const EvalReport report = Evaluate(scores, pred, dataset.Truth());
    json per = json::array();
    for (std::size_t k = 0; k < k_count; ++k) {
      const ConceptStats& s = report.per_concept[k];
      per.push_back({{"concept", concepts[k]},
                     {"precision", s.precision},
                     {"recall", s.recall},
                     {"f1", s.f1},
                     {"average_precision", s.average_precision},
                     {"has_positive", s.has_positive}});
    }
    json result = {{"mf_s", report.mf_s},
                   {"mf_c", report.mf_c},
                   {"map", report.map},
                   {"per_concept", std::move(per)}};
    Emit(*out_path, result.dump(1) + "\n", out);
  });
}

void AddGradcheck(CLI::App& app, std::ostream& out, int& status) {
  auto* cmd = app.add_subcommand("gradcheck", "Finite-difference check of context gradients");
  auto manifest = std::make_shared<std::string>();
  auto net = std::make_shared<NetworkFlags>();
  auto loss = std::make_shared<std::string>("hinge");
  auto seed = std::make_shared<std::uint64_t>(0);
  cmd->add_option("--manifest", *manifest, "Dataset manifest (small)")->required();
  net->Register(*cmd);
  cmd->add_option("--loss", *loss, "Loss to differentiate")
      ->check(CLI::IsMember({"hinge", "quadratic"}))
      ->capture_default_str();
  cmd->add_option("--seed", *seed, "Random seed")->capture_default_str();

  cmd->callback([=, &out, &status] {
    const Dataset dataset = LoadDataset(*manifest);
    ContextOptions contexts = net->Contexts();
    // Small instances cannot afford the default neighbourhood size.
    if (!contexts.use_semantic_links && contexts.semantic_k >= dataset.size()) {
      contexts.semantic_k = dataset.size() > 1 ? dataset.size() - 1 : 1;
    }
    const GradcheckReport r =
        Gradcheck(dataset, net->Depth(), contexts, *seed,
                  *loss == "hinge" ? GradcheckLoss::kHinge : GradcheckLoss::kQuadratic);
    out << json{{"checked", r.checked},
                {"excluded_ties", r.excluded_ties},
                {"checked_svm", r.checked_svm},
                {"max_rel_error", r.max_rel_error},
                {"max_rel_error_svm", r.max_rel_error_svm},
                {"worst_entry", r.worst_entry},
                {"tolerance", r.tolerance},
                {"passed", r.passed}}
               .dump(1)
        << '\n';
    if (!r.passed) status = kExitNumeric;
  });
}

struct Link {
  std::size_t from;
  std::size_t to;
  double weight;
};

std::vector<Link> TopLinks(const Matrix& m, std::size_t top) {
  std::vector<Link> links;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) links.push_back({i, j, m(i, j)});
  std::stable_sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
    return std::abs(a.weight) > std::abs(b.weight);
  });
  if (links.size() > top) links.resize(top);
  return links;
}

void AddInspect(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand("inspect", "Summarize a model file");
  auto model_path = std::make_shared<std::string>();
  auto top = std::make_shared<std::size_t>(5);
  cmd->add_option("--model", *model_path, "Model file")->required();
  cmd->add_option("--top", *top, "Links to list per context matrix")->capture_default_str();

  cmd->callback([=, &out] {
    const DhcnModel m = LoadModel(*model_path);
    json geometric = json::array();
    for (std::size_t t = 0; t < m.contexts.geometric.size(); ++t) {
      for (std::size_t c = 0; c < m.contexts.geometric[t].size(); ++c) {
        json links = json::array();
        for (const Link& l : TopLinks(m.contexts.geometric[t][c], *top)) {
          links.push_back({{"from_cell", l.from}, {"to_cell", l.to}, {"weight", l.weight}});
        }
        geometric.push_back({{"layer", t},
                             {"direction", std::string(DirectionName(kAllDirections[c]))},
                             {"top_links", std::move(links)}});
      }
    }
    json semantic = json::array();
    for (std::size_t t = 0; t < m.contexts.semantic.size(); ++t) {
      json links = json::array();
      for (const Link& l : TopLinks(m.contexts.semantic[t], *top)) {
        links.push_back({{"from", m.reference.image_ids[l.from]},
                         {"to", m.reference.image_ids[l.to]},
                         {"weight", l.weight}});
      }
      semantic.push_back({{"layer", t}, {"top_links", std::move(links)}});
    }
    json weight_norms = json::array();
    for (std::size_t k = 0; k < m.svm.num_classes(); ++k) {
      double sq = 0.0;
      for (std::size_t j = 0; j < m.svm.map_width(); ++j) sq += m.svm.weights(k, j) * m.svm.weights(k, j);
      weight_norms.push_back({{"concept", m.concepts[k]},
                              {"norm", std::sqrt(sq)},
                              {"bias", m.svm.weights(k, m.svm.map_width())}});
    }
    json doc = {
        {"format_version", m.format_version},
        {"mode", std::string(TrainingModeName(m.mode))},
        {"depth",
         {{"geo_layers", m.depth.geo_layers},
          {"sem_layers", m.depth.sem_layers},
          {"gamma1", m.depth.gamma1},
          {"gamma2", m.depth.gamma2}}},
        {"grid", {{"rows", m.grid.rows}, {"cols", m.grid.cols}}},
        {"radius", m.radius},
        {"initial_map",
         {{"kind", std::string(InitialMapKindName(m.initial_map.kind))},
          {"kpca_dim", m.initial_map.kpca_dim},
          {"landmarks", m.initial_map.landmarks.rows()}}},
        {"reference_images", m.reference.image_ids.size()},
        {"semantic_k", m.reference.k_neighbors},
        {"final_map_width", m.svm.map_width()},
        {"concepts", weight_norms},
        {"provenance",
         {{"seed", m.provenance.seed},
          {"final_objective", m.provenance.final_objective},
          {"best_iteration", m.provenance.best_iteration},
          {"flags", m.provenance.flags}}},
        {"geometric_contexts", std::move(geometric)},
        {"semantic_contexts", std::move(semantic)}};
    out << doc.dump(1) << '\n';
  });
}

void AddMakeSynthetic(CLI::App& app, std::ostream& out) {
  auto* cmd = app.add_subcommand(
      "make-synthetic", "Write a dataset with planted directional and scene structure");
  auto dir = std::make_shared<std::string>();
  auto opts = std::make_shared<SyntheticOptions>();
  auto train_count = std::make_shared<std::size_t>(0);
  cmd->add_option("--out", *dir, "Output directory")->required();
  cmd->add_option("--images", opts->num_images, "Number of images")->capture_default_str();
  cmd->add_option("--concepts", opts->num_concepts, "Number of concepts")->capture_default_str();
  cmd->add_option("--scenes", opts->num_scenes, "Number of scenes")->capture_default_str();
  cmd->add_option("--visibility", opts->object_visibility, "Object visibility")
      ->capture_default_str();
  cmd->add_option("--distractors", opts->distractor_rate, "Distractor rate")
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "Random seed")->capture_default_str();
  cmd->add_option("--split", *train_count,
                  "Write train/ and test/ with this many training images (0 = no split)");

  cmd->callback([=, &out] {
    const Dataset all = MakePlantedDataset(*opts);
    const std::filesystem::path root(*dir);
    if (*train_count == 0) {
      SaveDataset(all, root);
      out << (root / "manifest.json").string() << '\n';
      return;
    }
    Dataset train, test;
    SplitDataset(all, *train_count, train, test);
    SaveDataset(train, root / "train");
    SaveDataset(test, root / "test");
    out << (root / "train" / "manifest.json").string() << '\n'
        << (root / "test" / "manifest.json").string() << '\n';
  });
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep hierarchical context networks for multi-label image annotation", "dhcn"};
  app.require_subcommand(1);
  int status = kExitOk;
  AddTrain(app, out, err);
  AddPredict(app, out);
  AddEvaluate(app, out);
  AddGradcheck(app, out, status);
  AddInspect(app, out);
  AddMakeSynthetic(app, out);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return status;
}

}  // namespace dhcn::cli
