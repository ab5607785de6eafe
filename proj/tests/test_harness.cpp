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

#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "golden_run.hpp"
#include "qpvote/harness.hpp"
#include "qpvote/serialize.hpp"
#include "stub_server.hpp"
#include "test_support.hpp"

using namespace qpv;
using namespace qpv::harness;
using namespace qpv::test;

namespace {

std::filesystem::path write_lines(const std::filesystem::path& dir, const std::string& name,
                                  const std::vector<std::string>& lines) {
  const auto p = dir / name;
  std::ofstream out(p);
  for (const auto& l : lines) out << l << '\n';
  return p;
}

const char* kLineA = R"({"id":"a","prompt":"p","labels":["yes","no"],"gold":"yes"})";
const char* kLineB = R"({"id":"b","prompt":"p","labels":["yes","no"],"gold":"No","group":"g1"})";

template <class F>
std::vector<std::size_t> dataset_error_lines(F&& f, ErrorCode want) {
  try {
    f();
  } catch (const DatasetError& e) {
    CHECK(e.code() == want);
    return e.lines();
  }
  FAIL("expected a DatasetError");
  return {};
}

json minimal_config() {
  return json::parse(R"({"dataset":"d.jsonl","variants":[{"bits":8},{"bits":4}]})");
}

}  // namespace

TEST_CASE("dataset: valid lines, blank lines, canonical gold, features") {
  const auto dir = scratch_dir("ds_ok");
  const auto p = write_lines(dir, "d.jsonl",
                             {kLineA, "", "   ", kLineB,
                              R"({"id":"c","prompt":"p","labels":["A","B"],"gold":"refused","kind":"ood_out_of_scope","features":[1,2.5]})"});
  const auto ds = load_dataset_full(p);
  REQUIRE(ds.instances.size() == 3);
  CHECK(ds.instances[1].gold == "no");
  CHECK(ds.instances[1].group == "g1");
  CHECK(ds.instances[2].gold == "REFUSED");
  CHECK(ds.instances[2].label_space.allows_refusal_label);
  CHECK(ds.features.at("c") == std::vector<double>{1.0, 2.5});
  CHECK(load_dataset(p) == ds.instances);
}

TEST_CASE("dataset: errors carry line numbers") {
  const auto dir = scratch_dir("ds_bad");
  auto p = write_lines(dir, "parse.jsonl", {kLineA, "{not json"});
  CHECK(dataset_error_lines([&] { load_dataset(p); }, ErrorCode::kParseError) == std::vector<std::size_t>{2});
  p = write_lines(dir, "schema.jsonl", {kLineA, "", R"({"id":"z","prompt":"p","labels":["yes"],"gold":"yes"})"});
  CHECK(dataset_error_lines([&] { load_dataset(p); }, ErrorCode::kValidationError) == std::vector<std::size_t>{3});
  p = write_lines(dir, "gold.jsonl", {R"({"id":"z","prompt":"p","labels":["yes","no"],"gold":"maybe"})"});
  CHECK(dataset_error_lines([&] { load_dataset(p); }, ErrorCode::kValidationError) == std::vector<std::size_t>{1});
  p = write_lines(dir, "dup.jsonl", {kLineA, kLineB, kLineA});
  CHECK(dataset_error_lines([&] { load_dataset(p); }, ErrorCode::kValidationError) ==
        std::vector<std::size_t>{1, 3});
  p = write_lines(dir, "features.jsonl", {R"({"id":"f","prompt":"p","labels":["a","b"],"gold":"a","features":["x"]})"});
  CHECK(dataset_error_lines([&] { load_dataset(p); }, ErrorCode::kValidationError) == std::vector<std::size_t>{1});
  p = write_lines(dir, "kind.jsonl", {R"({"id":"k","prompt":"p","labels":["a","b"],"gold":"a","kind":"poetry"})"});
  CHECK(dataset_error_lines([&] { load_dataset(p); }, ErrorCode::kValidationError) == std::vector<std::size_t>{1});
  QPV_CHECK_THROWS_CODE(load_dataset(dir / "absent.jsonl"), ErrorCode::kIoError);
}

TEST_CASE("instance JSON round trip") {
  const auto inst = make_instance("r", {"x", "y"}, "y", TaskKind::kClassification, "g");
  CHECK(instance_from_json(to_json(inst)) == inst);
  const auto ood = make_instance("o", {"x", "y"}, "REFUSED", TaskKind::kOodOutOfScope);
  CHECK(instance_from_json(to_json(ood)) == ood);
}

TEST_CASE("config parsing: defaults, paths and validation") {
  const auto cfg = parse_run_config(minimal_config(), "/base");
  CHECK(cfg.dataset_path == "/base/d.jsonl");
  CHECK(cfg.output_dir == "/base/qpvote-out");
  CHECK(cfg.variants.size() == 2);
  CHECK(cfg.ensemble.variants == std::vector<PrecisionSpec>{{8, 0}, {4, 0}});
  CHECK(cfg.ensemble.ood_mode);
  CHECK(cfg.decoding.temperature == 0.0);
  CHECK_FALSE(cfg.config_hash.empty());
  CHECK(parse_run_config(minimal_config(), "/other").config_hash == cfg.config_hash);

  auto doc = minimal_config();
  doc["variants"].push_back({{"bits", 8}});
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc["variants"] = json::array();
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc["variants"][0]["bits"] = 1;
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc["variants"][0]["backend"] = "grpc";
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc["variants"][0]["backend"] = "http";
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc["seed"] = "seven";
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc.erase("dataset");
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  doc = minimal_config();
  doc["decoding"] = {{"max_tokens", 0}};
  QPV_CHECK_THROWS_CODE(parse_run_config(doc, "/"), ErrorCode::kConfigError);
  QPV_CHECK_THROWS_CODE(parse_run_config(json::array(), "/"), ErrorCode::kConfigError);
  QPV_CHECK_THROWS_CODE(load_run_config("/nonexistent/config.json"), ErrorCode::kIoError);
}

TEST_CASE("config parsing: environment supplies defaults, config wins") {
  ::setenv("QP_MAX_CONCURRENCY", "3", 1);
  ::setenv("QP_HTTP_TIMEOUT_SECS", "5", 1);
  auto doc = minimal_config();
  doc["variants"][1] = {{"bits", 4}, {"backend", "http"}, {"base_url", "http://localhost:1"}, {"model", "m"}};
  auto cfg = parse_run_config(doc, "/");
  CHECK(cfg.concurrency_limit == 3);
  CHECK(cfg.variants[1].http->timeout == std::chrono::milliseconds(5000));
  doc["concurrency_limit"] = 9;
  doc["http"] = {{"timeout_secs", 1.5}, {"max_retries", 0}};
  cfg = parse_run_config(doc, "/");
  CHECK(cfg.concurrency_limit == 9);
  CHECK(cfg.variants[1].http->timeout == std::chrono::milliseconds(1500));
  CHECK(cfg.variants[1].http->max_retries == 0);
  ::unsetenv("QP_MAX_CONCURRENCY");
  ::unsetenv("QP_HTTP_TIMEOUT_SECS");
}

TEST_CASE("golden run") {
  const auto g = run_golden("golden_unit");
  CHECK(g.actual == g.expected);
  CHECK(g.audit_rows == 3 * 20 + 20);
  CHECK(g.audit_lines == 3 * 20 + 20);
}

TEST_CASE("runs are reproducible and independent of concurrency") {
  auto cfg = load_run_config(test_data("golden/config.json"));
  cfg.output_dir = scratch_dir("repro_a");
  cfg.concurrency_limit = 1;
  const auto a = strip_volatile(report_to_json(run_benchmark(cfg)));
  const std::string audit_a = read_file(cfg.output_dir / kAuditFile);
  cfg.output_dir = scratch_dir("repro_b");
  cfg.concurrency_limit = 8;
  const auto b = strip_volatile(report_to_json(run_benchmark(cfg)));
  CHECK(a == b);
  CHECK(read_file(cfg.output_dir / kAuditFile) == audit_a);
}

TEST_CASE("audit rows") {
  auto cfg = load_run_config(test_data("golden/config.json"));
  cfg.output_dir = scratch_dir("audit");
  run_benchmark(cfg);
  std::ifstream in(cfg.output_dir / kAuditFile);
  std::string line;
  std::size_t gens = 0, votes = 0;
  while (std::getline(in, line)) {
    const auto row = json::parse(line);
    if (row["type"] == "generation") {
      ++gens;
      CHECK(row.contains("raw"));
      CHECK(row.contains("variant"));
      CHECK(row.contains("candidate"));
    } else {
      CHECK(row["type"] == "vote");
      CHECK(row.contains("tally"));
      CHECK(row.contains("survivors"));
      ++votes;
    }
  }
  CHECK(gens == 60);
  CHECK(votes == 20);
  CHECK_FALSE(std::filesystem::exists(cfg.output_dir / "report.json.tmp"));
}

TEST_CASE("empty dataset is rejected") {
  const auto dir = scratch_dir("empty_ds");
  write_lines(dir, "d.jsonl", {"", ""});
  auto doc = minimal_config();
  auto cfg = parse_run_config(doc, dir);
  cfg.output_dir = dir / "out";
  QPV_CHECK_THROWS_CODE(run_benchmark(cfg), ErrorCode::kEmptyDataset);
}

TEST_CASE("positive label defaults with a warning") {
  const auto dir = scratch_dir("poslabel");
  write_lines(dir, "d.jsonl", {R"({"id":"a","prompt":"p","labels":["hi","lo"],"gold":"hi","group":"m"})",
                               R"({"id":"b","prompt":"p","labels":["hi","lo"],"gold":"lo","group":"f"})"});
  auto cfg = parse_run_config(minimal_config(), dir);
  cfg.output_dir = dir / "out";
  const auto rep = run_benchmark(cfg);
  CHECK(std::any_of(rep.warnings.begin(), rep.warnings.end(),
                    [](const std::string& w) { return w.find("positive") != std::string::npos; }));
}

TEST_CASE("one failing HTTP variant degrades to Invalid candidates") {
  StubServer stub;
  stub.route("good1", "fixed:The answer is yes.");
  stub.route("good2", "fixed:yes");
  stub.route("broken", "status:500");
  const auto dir = scratch_dir("http_run");
  write_lines(dir, "d.jsonl", {kLineA, R"({"id":"b","prompt":"p","labels":["yes","no"],"gold":"no"})"});
  json doc = {{"dataset", "d.jsonl"},
              {"output_dir", "out"},
              {"http", {{"timeout_secs", 2}, {"max_retries", 1}}},
              {"variants",
               {{{"bits", 8}, {"backend", "http"}, {"base_url", stub.url("broken")}, {"model", "m8"}},
                {{"bits", 4}, {"backend", "http"}, {"base_url", stub.url("good1")}, {"model", "m4"}},
                {{"bits", 3}, {"backend", "http"}, {"base_url", stub.url("good2")}, {"model", "m3"}}}}};
  const auto cfg = parse_run_config(doc, dir);
  const auto rep = run_benchmark(cfg);
  CHECK(rep.ensemble.accuracy == 0.5);
  CHECK(rep.solo[0].metrics.n.invalid == 2);
  CHECK(stub.hits("broken") == 4);  // 2 instances x (1 try + 1 retry)
  std::ifstream in(cfg.output_dir / kAuditFile);
  std::string line;
  while (std::getline(in, line)) {
    const auto row = json::parse(line);
    if (row["type"] != "generation" || row["variant"]["bits"] != 8) continue;
    CHECK(row["candidate"]["verdict"] == "invalid");
    CHECK(row["candidate"]["reason"] == "transport");
    CHECK(row["transport_error"]["status"] == 500);
  }
}

TEST_CASE("report diff") {
  const auto a = json::parse(read_file(test_data("golden/report.golden.json")));
  auto b = a;
  b["ensemble"]["metrics"]["accuracy"] = 0.5;
  const std::string table = diff_reports(a, b);
  CHECK(table.find("accuracy") != std::string::npos);
  CHECK(table.find("-0.5000") != std::string::npos);
}

TEST_CASE("atomic write replaces the target") {
  const auto dir = scratch_dir("atomic");
  write_atomic(dir / "f.txt", "one");
  write_atomic(dir / "f.txt", "two");
  CHECK(read_file(dir / "f.txt") == "two");
  QPV_CHECK_THROWS_CODE(write_atomic(dir / "missing" / "f.txt", "x"), ErrorCode::kIoError);
}
