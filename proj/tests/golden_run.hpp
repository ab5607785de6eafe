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

#pragma once

#include <cstdlib>
#include <fstream>
#include <string>

#include "qpvote/harness.hpp"
#include "test_support.hpp"

namespace qpv::test {

struct GoldenResult {
  std::string actual;    // stripped report, as written to the golden file
  std::string expected;  // checked-in golden contents
  std::size_t audit_rows = 0;
  std::size_t audit_lines = 0;
};

// Runs the checked-in golden config into a scratch directory. With
// QPVOTE_UPDATE_GOLDEN=1 the golden file is rewritten from this run first.
inline GoldenResult run_golden(const std::string& scratch_name) {
  auto cfg = harness::load_run_config(test_data("golden/config.json"));
  cfg.output_dir = scratch_dir(scratch_name);
  const auto report = harness::run_benchmark(cfg);
  const auto written = nlohmann::json::parse(read_file(report.report_path));

  GoldenResult r;
  r.actual = harness::strip_volatile(written).dump(2) + "\n";
  const auto golden_path = test_data("golden/report.golden.json");
  if (const char* upd = std::getenv("QPVOTE_UPDATE_GOLDEN"); upd != nullptr && std::string(upd) == "1") {
    std::ofstream(golden_path, std::ios::binary) << r.actual;
  }
  r.expected = read_file(golden_path);
  r.audit_rows = report.audit_rows;
  const std::string audit = read_file(report.audit_path);
  r.audit_lines = static_cast<std::size_t>(std::count(audit.begin(), audit.end(), '\n'));
  return r;
}

}  // namespace qpv::test
