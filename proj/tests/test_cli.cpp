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

#include <cctype>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qpvote/cli.hpp"
#include "test_support.hpp"

using namespace qpv;
using namespace qpv::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qpvote");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"run"}).code == kExitUsage);
  const auto missing = invoke({"run", "--config", "/no/such/config.json"});
  CHECK(missing.code == kExitUsage);
  CHECK_FALSE(missing.err.empty());
  CHECK(invoke({"quantize-demo", "--bits", "1"}).code == kExitUsage);
  CHECK(invoke({"report", "--diff", "/no/a.json"}).code == kExitUsage);
}

TEST_CASE("help exits 0") {
  const auto h = invoke({"--help"});
  CHECK(h.code == kExitOk);
  CHECK(h.out.find("simulate") != std::string::npos);
}

TEST_CASE("run writes the report and prints a summary") {
  const auto dir = test::scratch_dir("cli_run");
  const auto r = invoke({"run", "--config", test::test_data("golden/config.json").string(), "--output-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("ensemble") != std::string::npos);
  CHECK(r.out.find("80 rows") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "audit.jsonl"));

  const auto d = invoke({"report", "--diff", (dir / "report.json").string(),
                      test::test_data("golden/report.golden.json").string()});
  CHECK(d.code == kExitOk);
  CHECK(d.out.find("accuracy") != std::string::npos);
}

TEST_CASE("runtime failures exit 2") {
  const auto dir = test::scratch_dir("cli_bad");
  {
    std::ofstream(dir / "config.json") << R"({"dataset":"missing.jsonl","variants":[{"bits":8}]})";
    std::ofstream(dir / "broken.json") << "{";
  }
  CHECK(invoke({"run", "--config", (dir / "config.json").string()}).code == kExitRuntime);
  CHECK(invoke({"run", "--config", (dir / "broken.json").string()}).code == kExitRuntime);
  CHECK(invoke({"simulate", "--profile", (dir / "broken.json").string()}).code == kExitRuntime);
}

TEST_CASE("simulate prints a reproducible report with the exact expectation") {
  const auto profile = (std::filesystem::path(QPVOTE_SOURCE_DIR) / "data" / "profile_3_4_8.json").string();
  const auto a = invoke({"simulate", "--profile", profile, "--n", "3000", "--seed", "5"});
  REQUIRE(a.code == kExitOk);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["n_instances"] == 3000);
  CHECK(j["seed"] == 5);
  CHECK(j["expected_error_rate"].get<double>() == doctest::Approx(0.1859).epsilon(1e-9));
  CHECK(j["per_variant"].size() == 3);
  CHECK(invoke({"simulate", "--profile", profile, "--n", "3000", "--seed", "5"}).out == a.out);
}

TEST_CASE("quantize demo") {
  const auto r = invoke({"quantize-demo", "--bits", "3,4,8", "--rows", "4", "--cols", "8", "--group-size", "8"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("max_err") != std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) rows += !line.empty() && std::isdigit(static_cast<unsigned char>(line[0]));
  CHECK(rows == 3);
}
