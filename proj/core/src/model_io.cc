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

#include "dhcn/model_io.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dhcn/error.h"

namespace dhcn {
namespace {

using nlohmann::json;

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::uint64_t ToLittleEndian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return out;
}

json EncodeMatrix(const Matrix& m) {
  std::vector<std::uint8_t> bytes(m.size() * 8);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::uint64_t le = ToLittleEndian(std::bit_cast<std::uint64_t>(m.data()[i]));
    std::memcpy(bytes.data() + 8 * i, &le, 8);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"f64le", Base64Encode(bytes)}};
}

Matrix DecodeMatrix(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const std::vector<std::uint8_t> bytes = Base64Decode(j.at("f64le").get<std::string>());
  if (bytes.size() != rows * cols * 8) {
    throw ValidationError("model file: matrix payload has " +
                          std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(rows * cols * 8));
  }
  std::vector<double> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint64_t le = 0;
    std::memcpy(&le, bytes.data() + 8 * i, 8);
    data[i] = std::bit_cast<double>(ToLittleEndian(le));
  }
  return Matrix(rows, cols, std::move(data));
}

json EncodeMask(const BoolMatrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"u8", Base64Encode(m.bits())}};
}

BoolMatrix DecodeMask(const json& j) {
  BoolMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const std::vector<std::uint8_t> bytes = Base64Decode(j.at("u8").get<std::string>());
  if (bytes.size() != m.bits().size()) {
    throw ValidationError("model file: mask payload has wrong length");
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] > 1) throw ValidationError("model file: mask byte out of range");
    m.bits()[i] = bytes[i];
  }
  return m;
}

// Scalars that must survive bit-exactly go through the same encoding.
json EncodeScalar(double v) { return EncodeMatrix(Matrix(1, 1, v)); }
double DecodeScalar(const json& j) {
  const Matrix m = DecodeMatrix(j);
  if (m.size() != 1) throw ValidationError("model file: expected a scalar");
  return m(0, 0);
}

json EncodeVector(const std::vector<double>& v) {
  return EncodeMatrix(Matrix(1, v.size(), v));
}
std::vector<double> DecodeVector(const json& j) {
  const Matrix m = DecodeMatrix(j);
  return {m.data().begin(), m.data().end()};
}

}  // namespace

std::string Base64Encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> Base64Decode(const std::string& text) {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
    return t;
  }();
  if (text.size() % 4 != 0) throw ValidationError("model file: bad base64 length");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        vals[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw ValidationError("model file: bad base64 padding");
      vals[k] = table[static_cast<unsigned char>(c)];
      if (vals[k] < 0) throw ValidationError("model file: bad base64 character");
    }
    const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string SerializeModel(const DhcnModel& model) {
  json geometric = json::array();
  for (const auto& layer : model.contexts.geometric) {
    json dirs = json::array();
    for (const Matrix& m : layer) dirs.push_back(EncodeMatrix(m));
    geometric.push_back(std::move(dirs));
  }
  json geo_masks = json::array();
  for (const BoolMatrix& m : model.contexts.geometric_masks) geo_masks.push_back(EncodeMask(m));
  json semantic = json::array();
  for (const Matrix& m : model.contexts.semantic) semantic.push_back(EncodeMatrix(m));

  const InitialMapSpec& im = model.initial_map;
  const SemanticReference& ref = model.reference;
  const json j = {
      {"format", "dhcn-model"},
      {"format_version", model.format_version},
      {"byte_order", "little"},
      {"mode", std::string(TrainingModeName(model.mode))},
      {"depth",
       {{"geo_layers", model.depth.geo_layers},
        {"sem_layers", model.depth.sem_layers},
        {"gamma1", EncodeScalar(model.depth.gamma1)},
        {"gamma2", EncodeScalar(model.depth.gamma2)}}},
      {"grid", {{"rows", model.grid.rows}, {"cols", model.grid.cols}}},
      {"radius", EncodeScalar(model.radius)},
      {"concepts", model.concepts},
      {"initial_map",
       {{"kind", std::string(InitialMapKindName(im.kind))},
        {"kpca_dim", im.kpca_dim},
        {"landmarks", EncodeMatrix(im.landmarks)},
        {"projection", EncodeMatrix(im.projection)},
        {"eigenvalue_floor", EncodeScalar(im.eigenvalue_floor)},
        {"l1_normalize", im.l1_normalize}}},
      {"contexts",
       {{"geometric", std::move(geometric)},
        {"geometric_masks", std::move(geo_masks)},
        {"semantic", std::move(semantic)},
        {"semantic_mask", EncodeMask(model.contexts.semantic_mask)}}},
      {"reference",
       {{"image_ids", ref.image_ids},
        {"initial_pooled", EncodeMatrix(ref.initial_pooled)},
        {"pooled", EncodeMatrix(ref.pooled)},
        {"similarity", std::string(SimilarityName(ref.similarity))},
        {"k_neighbors", ref.k_neighbors}}},
      {"svm",
       {{"weights", EncodeMatrix(model.svm.weights)},
        {"c_k", EncodeVector(model.svm.c_k)},
        {"c_pos", EncodeVector(model.svm.c_pos)}}},
      {"provenance",
       {{"seed", model.provenance.seed},
        {"flags", model.provenance.flags},
        {"final_objective", EncodeScalar(model.provenance.final_objective)},
        {"best_iteration", model.provenance.best_iteration}}},
  };
  return j.dump(1) + "\n";
}

DhcnModel DeserializeModel(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file is truncated or malformed: ") +
                          e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "dhcn-model") {
      throw ValidationError("not a dhcn model file");
    }
    DhcnModel m;
    m.format_version = j.at("format_version").get<std::uint32_t>();
    if (m.format_version != kModelFormatVersion) {
      throw ValidationError("unsupported model format version " +
                            std::to_string(m.format_version) + " (expected " +
                            std::to_string(kModelFormatVersion) + ")");
    }
    if (j.at("byte_order").get<std::string>() != "little") {
      throw ValidationError("unsupported model byte order");
    }
    m.mode = ParseTrainingMode(j.at("mode").get<std::string>());
    const json& depth = j.at("depth");
    m.depth.geo_layers = depth.at("geo_layers").get<std::size_t>();
    m.depth.sem_layers = depth.at("sem_layers").get<std::size_t>();
    m.depth.gamma1 = DecodeScalar(depth.at("gamma1"));
    m.depth.gamma2 = DecodeScalar(depth.at("gamma2"));
    m.grid.rows = j.at("grid").at("rows").get<std::size_t>();
    m.grid.cols = j.at("grid").at("cols").get<std::size_t>();
    m.radius = DecodeScalar(j.at("radius"));
    m.concepts = j.at("concepts").get<std::vector<std::string>>();

    const json& im = j.at("initial_map");
    m.initial_map.kind = ParseInitialMapKind(im.at("kind").get<std::string>());
    m.initial_map.kpca_dim = im.at("kpca_dim").get<std::size_t>();
    m.initial_map.landmarks = DecodeMatrix(im.at("landmarks"));
    m.initial_map.projection = DecodeMatrix(im.at("projection"));
    m.initial_map.eigenvalue_floor = DecodeScalar(im.at("eigenvalue_floor"));
    m.initial_map.l1_normalize = im.at("l1_normalize").get<bool>();

    const json& ctx = j.at("contexts");
    for (const json& layer : ctx.at("geometric")) {
      std::vector<Matrix> dirs;
      for (const json& d : layer) dirs.push_back(DecodeMatrix(d));
      m.contexts.geometric.push_back(std::move(dirs));
    }
    for (const json& mask : ctx.at("geometric_masks"))
      m.contexts.geometric_masks.push_back(DecodeMask(mask));
    for (const json& s : ctx.at("semantic")) m.contexts.semantic.push_back(DecodeMatrix(s));
    m.contexts.semantic_mask = DecodeMask(ctx.at("semantic_mask"));

    const json& ref = j.at("reference");
    m.reference.image_ids = ref.at("image_ids").get<std::vector<std::string>>();
    m.reference.initial_pooled = DecodeMatrix(ref.at("initial_pooled"));
    m.reference.pooled = DecodeMatrix(ref.at("pooled"));
    m.reference.similarity = ParseSimilarity(ref.at("similarity").get<std::string>());
    m.reference.k_neighbors = ref.at("k_neighbors").get<std::size_t>();

    const json& svm = j.at("svm");
    m.svm.weights = DecodeMatrix(svm.at("weights"));
    m.svm.c_k = DecodeVector(svm.at("c_k"));
    m.svm.c_pos = DecodeVector(svm.at("c_pos"));

    const json& prov = j.at("provenance");
    m.provenance.seed = prov.at("seed").get<std::uint64_t>();
    m.provenance.flags = prov.at("flags").get<std::map<std::string, std::string>>();
    m.provenance.final_objective = DecodeScalar(prov.at("final_objective"));
    m.provenance.best_iteration = prov.at("best_iteration").get<std::size_t>();

    if (m.svm.c_k.size() != m.svm.num_classes() ||
        m.svm.c_pos.size() != m.svm.num_classes() ||
        m.concepts.size() != m.svm.num_classes()) {
      throw ValidationError("model file: SVM and concept counts disagree");
    }
    if (m.contexts.geometric.size() != m.depth.geo_layers ||
        m.contexts.semantic.size() != m.depth.sem_layers) {
      throw ValidationError("model file: context layers disagree with depth");
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file is missing or has invalid fields: ") +
                          e.what());
  }
}

void SaveModel(const DhcnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path.string() + ": cannot write model file");
  out << SerializeModel(model);
  if (!out) throw ValidationError(path.string() + ": write failed");
}

DhcnModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open model file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return DeserializeModel(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace dhcn
