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

#ifndef DHCN_MODEL_IO_H_
#define DHCN_MODEL_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dhcn/model.h"

namespace dhcn {

// The model file is a single JSON document. Matrices are stored as
// {"rows", "cols", "f64le"} where f64le is base64 of the row-major IEEE-754
// binary64 values in little-endian byte order; masks use "u8" with one byte
// per entry. Loading a file whose format_version differs from
// kModelFormatVersion fails.
std::string SerializeModel(const DhcnModel& model);
DhcnModel DeserializeModel(const std::string& text);

void SaveModel(const DhcnModel& model, const std::filesystem::path& path);
DhcnModel LoadModel(const std::filesystem::path& path);

std::string Base64Encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> Base64Decode(const std::string& text);

}  // namespace dhcn

#endif  // DHCN_MODEL_IO_H_
