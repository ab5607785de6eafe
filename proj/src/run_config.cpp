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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hash_util.hpp"
#include "qpvote/harness.hpp"
#include "qpvote/serialize.hpp"

namespace qpv::harness {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kConfigError, msg); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("config field \"") + key + "\" has the wrong type");
  }
}

std::optional<std::size_t> env_concurrency() {
  const char* raw = std::getenv("QP_MAX_CONCURRENCY");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1) return std::nullopt;
  return static_cast<std::size_t>(v);
}

}  // namespace

void RunConfig::validate() const {
  if (concurrency_limit < 1) bad("concurrency_limit must be >= 1");
  if (variants.empty()) bad("at least one variant is required");
  std::vector<PrecisionSpec> specs;
  for (const auto& v : variants) {
    specs.push_back(v.spec);
    if (v.backend == BackendKind::kHttp && !v.http) bad("http variant " + to_string(v.spec) + " lacks an endpoint");
    if (!(v.refusal_prob >= 0.0 && v.refusal_prob <= 1.0)) bad("refusal_prob must lie in [0, 1]");
  }
  try {
    validate_variants(specs);
    decoding.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  if (specs != ensemble.variants) bad("ensemble variants out of sync with variant list");
  if (sim.n_features == 0 || sim.group_size == 0) bad("sim.n_features and sim.group_size must be >= 1");
  if (dataset_path.empty()) bad("\"dataset\" is required");
  if (output_dir.empty()) bad("\"output_dir\" is required");
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad("config must be a JSON object");
  RunConfig cfg;
  cfg.config_hash = [&] {
    std::ostringstream os;
    os << std::hex << detail::fnv1a(doc.dump());
    return os.str();
  }();

  cfg.dataset_path = resolve(base_dir, get_or<std::string>(doc, "dataset", ""));
  if (!doc.contains("dataset")) cfg.dataset_path.clear();
  cfg.output_dir = resolve(base_dir, get_or<std::string>(doc, "output_dir", "qpvote-out"));
  if (doc.contains("lexicon")) cfg.lexicon_path = resolve(base_dir, get_or<std::string>(doc, "lexicon", ""));
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);
  cfg.concurrency_limit = get_or<std::size_t>(doc, "concurrency_limit", env_concurrency().value_or(4));
  cfg.ensemble.ood_mode = get_or<bool>(doc, "ood_mode", true);

  const json dec = get_or<json>(doc, "decoding", json::object());
  cfg.decoding.temperature = get_or<double>(dec, "temperature", 0.0);
  cfg.decoding.max_tokens = get_or<int>(dec, "max_tokens", 64);
  cfg.decoding.stop_sequences = get_or<std::vector<std::string>>(dec, "stop", {});

  const json http = get_or<json>(doc, "http", json::object());
  const auto env_timeout = backends::timeout_from_env(std::chrono::milliseconds(60'000));
  std::chrono::milliseconds timeout = env_timeout;
  if (http.contains("timeout_secs")) {
    const double secs = get_or<double>(http, "timeout_secs", 60.0);
    if (!(secs > 0.0)) bad("http.timeout_secs must be > 0");
    timeout = std::chrono::milliseconds(static_cast<long long>(secs * 1000.0));
  }
  const int retries = get_or<int>(http, "max_retries", 2);

  const json sim = get_or<json>(doc, "sim", json::object());
  cfg.sim.n_features = get_or<std::size_t>(sim, "n_features", cfg.sim.n_features);
  cfg.sim.group_size = get_or<std::size_t>(sim, "group_size", cfg.sim.group_size);
  cfg.sim.margin = get_or<double>(sim, "margin", cfg.sim.margin);
  cfg.sim.noise = get_or<double>(sim, "noise", cfg.sim.noise);
  cfg.sim.seed_noise = get_or<double>(sim, "seed_noise", cfg.sim.seed_noise);
  cfg.sim.abstain_margin = get_or<double>(sim, "abstain_margin", cfg.sim.abstain_margin);
  if (sim.contains("world_seed")) cfg.sim.world_seed = get_or<std::uint64_t>(sim, "world_seed", 0);

  const json met = get_or<json>(doc, "metrics", json::object());
  cfg.metrics.positive_label = get_or<std::string>(met, "positive_label", "");
  cfg.metrics.ethics_acceptable_label =
      get_or<std::string>(met, "ethics_acceptable_label", cfg.metrics.ethics_acceptable_label);
  const json w = get_or<json>(met, "weights", json::object());
  auto& mw = cfg.metrics.weights;
  mw.fairness.dpd = get_or<double>(w, "fairness_dpd", mw.fairness.dpd);
  mw.fairness.eod = get_or<double>(w, "fairness_eod", mw.fairness.eod);
  mw.ood.refusal = get_or<double>(w, "ood_refusal", mw.ood.refusal);
  mw.ood.macc = get_or<double>(w, "ood_macc", mw.ood.macc);
  mw.ethics.accuracy = get_or<double>(w, "ethics_accuracy", mw.ethics.accuracy);
  mw.ethics.fpr = get_or<double>(w, "ethics_fpr", mw.ethics.fpr);

  const auto variants = doc.find("variants");
  if (variants == doc.end() || !variants->is_array() || variants->empty()) {
    bad("\"variants\" must be a non-empty array");
  }
  for (const auto& v : *variants) {
    if (!v.is_object()) bad("each variant must be an object");
    std::optional<PrecisionSpec> spec;
    try {
      spec = precision_from_json(v);
    } catch (const Error& e) {
      bad(std::string("variant: ") + e.what());
    }
    VariantConfig vc{*spec, BackendKind::kSim, std::nullopt, 0.0, {}};
    const std::string kind = get_or<std::string>(v, "backend", "sim");
    if (kind == "sim") {
      vc.backend = BackendKind::kSim;
    } else if (kind == "http") {
      vc.backend = BackendKind::kHttp;
      backends::HttpEndpoint ep;
      ep.base_url = get_or<std::string>(v, "base_url", "");
      if (ep.base_url.empty()) bad("http variant " + to_string(*spec) + " needs base_url");
      ep.model = get_or<std::string>(v, "model", "");
      if (v.contains("api_key_env")) {
        const std::string var = get_or<std::string>(v, "api_key_env", "");
        if (const char* key = std::getenv(var.c_str()); key != nullptr && *key != '\0') ep.bearer_token = key;
      }
      ep.timeout = timeout;
      ep.max_retries = retries;
      vc.http = std::move(ep);
    } else {
      bad("unknown backend \"" + kind + "\"");
    }
    vc.refusal_prob = get_or<double>(v, "refusal_prob", 0.0);
    vc.error_profile = get_or<std::map<std::string, double>>(v, "error_profile", {});
    cfg.ensemble.variants.push_back(vc.spec);
    cfg.variants.push_back(std::move(vc));
  }
  cfg.ensemble.concurrency_limit = cfg.variants.size();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) bad("config " + path.string() + " is not valid JSON");
  return parse_run_config(doc, path.parent_path());
}

}  // namespace qpv::harness
