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

#include "dhcn/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dhcn/error.h"

namespace dhcn {
namespace {

using nlohmann::json;

std::string Where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

template <typename T>
T Require(const json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key)) {
    throw ValidationError(path.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<std::string> Dataset::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(images.size());
  for (const ImageRecord& im : images) ids.push_back(im.id);
  return ids;
}

std::vector<Matrix> Dataset::Features() const {
  std::vector<Matrix> out;
  out.reserve(images.size());
  for (const ImageRecord& im : images) out.push_back(im.features);
  return out;
}

BoolMatrix Dataset::Truth() const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < concepts.size(); ++k) index.emplace(concepts[k], k);
  BoolMatrix truth(images.size(), concepts.size());
  for (std::size_t p = 0; p < images.size(); ++p) {
    for (const std::string& label : images[p].labels) {
      auto it = index.find(label);
      if (it == index.end()) {
        throw ValidationError("image '" + images[p].id +
                              "' has undeclared concept '" + label + "'");
      }
      truth.set(p, it->second, true);
    }
  }
  return truth;
}

bool Dataset::HasSemanticLinks() const {
  for (const ImageRecord& im : images)
    if (!im.semantic_links.empty()) return true;
  return false;
}

std::vector<std::pair<std::string, std::string>> Dataset::LinkPairs() const {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const ImageRecord& im : images)
    for (const std::string& to : im.semantic_links) pairs.emplace_back(im.id, to);
  return pairs;
}

void ValidateDataset(const Dataset& dataset) {
  ValidateGrid(dataset.grid);
  if (dataset.feature_dim == 0) throw ValidationError("feature_dim must be >= 1");
  std::set<std::string> concepts;
  for (const std::string& c : dataset.concepts) {
    if (!concepts.insert(c).second) {
      throw ValidationError("duplicate concept name '" + c + "'");
    }
  }
  std::set<std::string> ids;
  for (const ImageRecord& im : dataset.images) {
    if (!ids.insert(im.id).second) {
      throw ValidationError("duplicate image id '" + im.id + "'");
    }
    for (const std::string& label : im.labels) {
      if (!concepts.contains(label)) {
        throw ValidationError("image '" + im.id +
                              "' has undeclared concept '" + label + "'");
      }
    }
    if (im.features.rows() != dataset.grid.cells() ||
        im.features.cols() != dataset.feature_dim) {
      throw ValidationError("image '" + im.id + "': expected " +
                            std::to_string(dataset.grid.cells()) + "x" +
                            std::to_string(dataset.feature_dim) +
                            " features, got " + ShapeString(im.features));
    }
    for (double v : im.features.data()) {
      if (!std::isfinite(v)) {
        throw ValidationError("image '" + im.id + "': non-finite feature value");
      }
      if (dataset.features_are_histograms && v < 0.0) {
        throw ValidationError("image '" + im.id +
                              "': negative value in histogram features");
      }
    }
  }
}

Matrix ReadFeatureFile(const std::filesystem::path& path,
                       std::size_t expected_rows, std::size_t expected_cols) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open feature file");
  std::vector<double> data;
  data.reserve(expected_rows * expected_cols);
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (char& ch : line)
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    std::size_t cols = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, v);
      if (ec != std::errc() || ptr != line.data() + end) {
        throw ValidationError(Where(path, line_no) + "cannot parse number '" +
                              line.substr(pos, end - pos) + "'");
      }
      data.push_back(v);
      ++cols;
      pos = end;
    }
    if (cols == 0) continue;
    if (cols != expected_cols) {
      throw ValidationError(Where(path, line_no) + "expected " +
                            std::to_string(expected_cols) + " values, got " +
                            std::to_string(cols));
    }
    ++rows;
  }
  if (rows != expected_rows) {
    throw ValidationError(path.string() + ": expected " +
                          std::to_string(expected_rows) + " rows, got " +
                          std::to_string(rows));
  }
  return Matrix(rows, expected_cols, std::move(data));
}

void WriteFeatureFile(const std::filesystem::path& path, const Matrix& features) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path.string() + ": cannot write feature file");
  char buf[64];
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), features(i, j));
      if (j > 0) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

Dataset LoadDataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError(manifest_path.string() + ": cannot open manifest");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(manifest_path.string() + ": " + e.what());
  }
  Dataset ds;
  ds.grid.rows = Require<std::size_t>(j, "grid_rows", manifest_path);
  ds.grid.cols = Require<std::size_t>(j, "grid_cols", manifest_path);
  ds.feature_dim = Require<std::size_t>(j, "feature_dim", manifest_path);
  ds.features_are_histograms = j.value("features_are_histograms", false);
  ds.concepts = Require<std::vector<std::string>>(j, "concepts", manifest_path);
  ValidateGrid(ds.grid);

  const std::filesystem::path base = manifest_path.parent_path();
  const json images = j.value("images", json::array());
  if (!images.is_array()) {
    throw ValidationError(manifest_path.string() + ": 'images' must be an array");
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    const json& entry = images[i];
    const std::string ctx = manifest_path.string() + " image #" + std::to_string(i);
    ImageRecord rec;
    rec.id = Require<std::string>(entry, "id", ctx);
    const auto file = Require<std::string>(entry, "feature_file", ctx);
    rec.labels = entry.value("labels", std::vector<std::string>{});
    rec.semantic_links = entry.value("semantic_links", std::vector<std::string>{});
    rec.features = ReadFeatureFile(base / file, ds.grid.cells(), ds.feature_dim);
    ds.images.push_back(std::move(rec));
  }
  ValidateDataset(ds);
  return ds;
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir,
                 const std::string& manifest_name) {
  std::filesystem::create_directories(dir);
  json images = json::array();
  for (const ImageRecord& im : dataset.images) {
    const std::string file = im.id + ".txt";
    WriteFeatureFile(dir / file, im.features);
    json entry = {{"id", im.id}, {"feature_file", file}, {"labels", im.labels}};
    if (!im.semantic_links.empty()) entry["semantic_links"] = im.semantic_links;
    images.push_back(std::move(entry));
  }
  const json j = {{"grid_rows", dataset.grid.rows},
                  {"grid_cols", dataset.grid.cols},
                  {"feature_dim", dataset.feature_dim},
                  {"features_are_histograms", dataset.features_are_histograms},
                  {"concepts", dataset.concepts},
                  {"images", std::move(images)}};
  std::ofstream out(dir / manifest_name);
  if (!out) throw ValidationError((dir / manifest_name).string() + ": cannot write manifest");
  out << j.dump(2) << '\n';
}

}  // namespace dhcn
