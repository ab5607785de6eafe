// Copyright 2026 The qpvote Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>

#include "qpvote/harness.hpp"
#include "qpvote/serialize.hpp"

namespace qpv::harness {

Dataset load_dataset_full(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open dataset " + path.string());

  Dataset ds;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
      throw DatasetError(ErrorCode::kParseError, {line_no}, "line " + std::to_string(line_no) + ": invalid JSON");
    }
    TaskInstance inst;
    try {
      inst = instance_from_json(doc);
    } catch (const Error& e) {
      throw DatasetError(ErrorCode::kValidationError, {line_no},
                         "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (const auto [it, fresh] = first_line.emplace(inst.id, line_no); !fresh) {
      throw DatasetError(ErrorCode::kValidationError, {it->second, line_no},
                         "duplicate id \"" + inst.id + "\" on lines " + std::to_string(it->second) +
                             " and " + std::to_string(line_no));
    }
    if (const auto f = doc.find("features"); f != doc.end() && !f->is_null()) {
      if (!f->is_array() || !std::all_of(f->begin(), f->end(), [](const json& v) { return v.is_number(); })) {
        throw DatasetError(ErrorCode::kValidationError, {line_no},
                           "line " + std::to_string(line_no) + ": \"features\" must be an array of numbers");
      }
      ds.features[inst.id] = f->get<std::vector<double>>();
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::vector<TaskInstance> load_dataset(const std::filesystem::path& path) {
  return load_dataset_full(path).instances;
}

}  // namespace qpv::harness
