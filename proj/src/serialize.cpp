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

#include "qpvote/serialize.hpp"

#include <algorithm>
#include <cctype>

namespace qpv {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::kValidationError, msg); }

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) bad(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) bad(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

json to_json(const PrecisionSpec& spec) { return {{"bits", spec.bits()}, {"seed", spec.seed()}}; }

PrecisionSpec precision_from_json(const json& j) {
  if (!j.is_object()) bad("variant must be an object");
  const json& b = require(j, "bits");
  if (!b.is_number_integer()) bad("\"bits\" must be an integer");
  std::uint64_t seed = 0;
  if (const auto s = j.find("seed"); s != j.end()) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      bad("\"seed\" must be a non-negative integer");
    }
    seed = s->get<std::uint64_t>();
  }
  return PrecisionSpec(b.get<int>(), seed);
}

json to_json(const TaskInstance& inst) {
  json j = {{"id", inst.id},
            {"prompt", inst.prompt},
            {"labels", inst.label_space.labels},
            {"gold", inst.gold},
            {"kind", std::string(to_string(inst.kind))},
            {"allows_refusal", inst.label_space.allows_refusal_label}};
  if (inst.group) j["group"] = *inst.group;
  return j;
}

TaskInstance instance_from_json(const json& j) {
  if (!j.is_object()) bad("dataset line must be a JSON object");
  TaskInstance inst;
  inst.id = require_string(j, "id");
  if (inst.id.empty()) bad("\"id\" must be non-empty");
  inst.prompt = require_string(j, "prompt");
  if (inst.prompt.empty()) bad("\"prompt\" must be non-empty");

  const json& labels = require(j, "labels");
  if (!labels.is_array()) bad("\"labels\" must be an array of strings");
  for (const auto& l : labels) {
    if (!l.is_string()) bad("\"labels\" must be an array of strings");
    inst.label_space.labels.push_back(l.get<std::string>());
  }

  inst.kind = TaskKind::kClassification;
  if (const auto k = j.find("kind"); k != j.end() && !k->is_null()) {
    if (!k->is_string()) bad("\"kind\" must be a string");
    const auto parsed = parse_task_kind(k->get<std::string>());
    if (!parsed) bad("unknown kind \"" + k->get<std::string>() + "\"");
    inst.kind = *parsed;
  }
  inst.label_space.allows_refusal_label = inst.kind == TaskKind::kOodOutOfScope;
  if (const auto a = j.find("allows_refusal"); a != j.end() && !a->is_null()) {
    if (!a->is_boolean()) bad("\"allows_refusal\" must be a boolean");
    inst.label_space.allows_refusal_label = a->get<bool>();
  }

  const std::string gold = require_string(j, "gold");
  if (auto canon = inst.label_space.canonical(gold)) {
    inst.gold = *canon;
  } else if (gold.size() == kRefusedLabel.size() &&
             std::equal(gold.begin(), gold.end(), kRefusedLabel.begin(),
                        [](char a, char b) { return std::toupper(static_cast<unsigned char>(a)) == b; })) {
    inst.gold = std::string(kRefusedLabel);
  } else {
    inst.gold = gold;
  }

  if (const auto g = j.find("group"); g != j.end() && !g->is_null()) {
    if (!g->is_string()) bad("\"group\" must be a string");
    inst.group = g->get<std::string>();
  }

  try {
    validate_instance(inst);
  } catch (const Error& e) {
    bad(e.what());
  }
  return inst;
}

json to_json(const Candidate& c) {
  json j = {{"source", to_json(c.source)}};
  if (c.is_label()) {
    j["verdict"] = "label";
    j["label"] = c.label();
  } else if (c.is_refusal()) {
    j["verdict"] = "refusal";
  } else {
    j["verdict"] = "invalid";
    j["reason"] = std::get<InvalidVerdict>(c.verdict).reason;
  }
  return j;
}

json to_json(const VoteOutcome& o) {
  json survivors = json::array();
  for (const auto& s : o.survivors) survivors.push_back(to_json(s));
  return {{"decision", o.decision ? *o.decision : std::string(kRefusedLabel)},
          {"refused", o.refused()},
          {"tally", o.tally},
          {"tiebreak_used", o.tiebreak_used},
          {"survivors", std::move(survivors)}};
}

json to_json(const backends::TransportError& e) {
  json j = {{"kind", std::string(backends::to_string(e.kind))}, {"message", e.message}};
  if (e.http_status != 0) j["status"] = e.http_status;
  return j;
}

json to_json(const metrics::MetricReport& r) {
  json j = {{"accuracy", r.accuracy},
            {"refusal_rate", r.refusal_rate},
            {"refusal_rate_incl_invalid", r.refusal_rate_incl_invalid}};
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  opt("dpd", r.dpd);
  opt("eod", r.eod);
  opt("fairness_score", r.fairness_score);
  opt("macc", r.macc);
  opt("ood_score", r.ood_score);
  opt("ethics_accuracy", r.ethics_accuracy);
  opt("ethics_fpr", r.ethics_fpr);
  opt("ethics_score", r.ethics_score);
  j["n"] = {{"total", r.n.total},
            {"correct", r.n.correct},
            {"refused", r.n.refused},
            {"invalid", r.n.invalid},
            {"by_kind", r.n.by_kind}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

json to_json(const simlab::SimReport& r) {
  json variants = json::array();
  for (const auto& v : r.per_variant) {
    variants.push_back({{"variant", to_json(v.spec)},
                        {"error_rate", v.error_rate},
                        {"refusal_rate", v.refusal_rate},
                        {"errors", v.errors},
                        {"refusals", v.refusals}});
  }
  return {{"n_instances", r.n_instances},
          {"seed", r.seed},
          {"error_rate", r.error_rate},
          {"refusal_rate", r.refusal_rate},
          {"accuracy", r.accuracy},
          {"errors", r.errors},
          {"refusals", r.refusals},
          {"tiebreaks", r.tiebreaks},
          {"best_single_accuracy", r.best_single_accuracy()},
          {"per_variant", std::move(variants)}};
}

simlab::SimProfile profile_from_json(const json& j) {
  if (!j.is_object()) bad("profile must be a JSON object");
  simlab::SimProfile p;
  try {
    p.per_variant_error = require(j, "per_variant_error").get<std::vector<double>>();
    p.m = j.value("m", p.per_variant_error.size());
    p.per_variant_refusal =
        j.value("per_variant_refusal", std::vector<double>(p.m, 0.0));
    p.pairwise_error_correlation = j.value("pairwise_error_correlation", 0.0);
    p.n_labels = j.value("n_labels", 2);
    p.seed = j.value("seed", std::uint64_t{0});
    p.bits = j.value("bits", std::vector<int>{});
  } catch (const json::exception& e) {
    bad(std::string("malformed profile: ") + e.what());
  }
  try {
    p.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return p;
}

}  // namespace qpv
