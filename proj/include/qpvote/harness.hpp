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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpvote/core.hpp"
#include "qpvote/ensemble.hpp"
#include "qpvote/http_backend.hpp"
#include "qpvote/metrics.hpp"

namespace qpv::harness {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<TaskInstance> instances;
  // Optional explicit feature vectors ("features" field) for the simulated backend.
  std::map<std::string, std::vector<double>> features;
};

// JSONL, one instance per line, blank lines ignored. Errors carry 1-based line
// numbers: kParseError for bad JSON, kValidationError for schema/invariant
// failures and duplicate ids (both lines reported).
Dataset load_dataset_full(const std::filesystem::path& path);
std::vector<TaskInstance> load_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class BackendKind { kSim, kHttp };

struct VariantConfig {
  PrecisionSpec spec;
  BackendKind backend = BackendKind::kSim;
  std::optional<backends::HttpEndpoint> http;
  // Simulated-backend knobs.
  double refusal_prob = 0.0;
  std::map<std::string, double> error_profile;
};

struct SimWorldConfig {
  std::size_t n_features = 8;
  std::size_t group_size = 4;
  double margin = 1.2;
  double noise = 0.6;
  double seed_noise = 0.25;
  double abstain_margin = 0.0;
  std::optional<std::uint64_t> world_seed;  // defaults to RunConfig::seed
};

struct RunConfig {
  ensemble::EnsembleConfig ensemble;
  std::vector<VariantConfig> variants;
  SimWorldConfig sim;
  DecodingParams decoding;
  std::filesystem::path dataset_path;
  std::optional<std::filesystem::path> lexicon_path;
  std::filesystem::path output_dir;
  std::size_t concurrency_limit = 4;
  metrics::MetricOptions metrics;
  std::uint64_t seed = 0;
  std::string config_hash;

  void validate() const;
};

// Schema (paths resolve relative to the config file's directory):
// {
//   "dataset": "data.jsonl", "output_dir": "out", "lexicon": "lex.txt"?,
//   "seed": 7, "concurrency_limit": 4, "ood_mode": true,
//   "decoding": {"temperature": 0, "max_tokens": 64, "stop": []},
//   "http": {"timeout_secs": 60, "max_retries": 2},
//   "sim": {"n_features", "group_size", "margin", "noise", "seed_noise",
//           "abstain_margin", "world_seed"},
//   "metrics": {"positive_label", "ethics_acceptable_label",
//               "weights": {"fairness_dpd", "fairness_eod", "ood_refusal",
//                           "ood_macc", "ethics_accuracy", "ethics_fpr"}},
//   "variants": [{"bits": 8, "seed": 0, "backend": "sim"|"http",
//                 "refusal_prob": 0.0, "error_profile": {"label": bias},
//                 "base_url": "...", "model": "...", "api_key_env": "..."}]
// }
// QP_MAX_CONCURRENCY and QP_HTTP_TIMEOUT_SECS supply defaults; explicit config
// values win. Throws kConfigError.
RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Benchmark run
// ---------------------------------------------------------------------------

struct SoloReport {
  PrecisionSpec variant;
  metrics::MetricReport metrics;
};

struct RunReport {
  json provenance;
  std::vector<SoloReport> solo;
  metrics::MetricReport ensemble;
  std::vector<std::string> warnings;
  std::size_t audit_rows = 0;
  std::filesystem::path report_path;
  std::filesystem::path audit_path;
};

inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kAuditFile = "audit.jsonl";

// Builds backends from the config, runs every instance through the ensemble,
// scores each variant alone on the same generations, and atomically writes
// report.json and audit.jsonl under output_dir. Throws kEmptyDataset,
// kConfigError, or dataset errors; transport failures only degrade candidates.
RunReport run_benchmark(const RunConfig& cfg);

json report_to_json(const RunReport& report);

// Drops provenance.timestamps so reports from repeated runs compare equal.
json strip_volatile(json report);

// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Fixed-width table of metric deltas (b - a) for the ensemble and each solo
// variant present in both reports.
std::string diff_reports(const json& a, const json& b);

}  // namespace qpv::harness
