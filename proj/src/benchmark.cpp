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

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "hash_util.hpp"
#include "qpvote/harness.hpp"
#include "qpvote/serialize.hpp"
#include "qpvote/sim_backend.hpp"

namespace qpv::harness {

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

backends::BackendRegistry build_registry(const RunConfig& cfg, const Dataset& ds) {
  backends::BackendRegistry registry;
  const bool any_sim = std::any_of(cfg.variants.begin(), cfg.variants.end(),
                                   [](const VariantConfig& v) { return v.backend == BackendKind::kSim; });
  std::shared_ptr<backends::ToyTaskTable> table;
  std::optional<quant::TensorF> dense;
  const std::uint64_t world_seed = cfg.sim.world_seed.value_or(cfg.seed);
  if (any_sim) {
    std::size_t slots = 2;
    for (const auto& inst : ds.instances) slots = std::max(slots, inst.label_space.labels.size());
    dense = backends::make_dense_weights(slots, cfg.sim.n_features, world_seed);
    table = std::make_shared<backends::ToyTaskTable>();
    const backends::ToyWorldParams params{cfg.sim.margin, cfg.sim.noise, world_seed};
    for (const auto& inst : ds.instances) {
      backends::ToyItem item = backends::make_toy_item(inst, *dense, params);
      if (const auto f = ds.features.find(inst.id); f != ds.features.end()) {
        if (f->second.size() != cfg.sim.n_features) {
          throw Error(ErrorCode::kConfigError, "instance " + inst.id + " has " +
                                                   std::to_string(f->second.size()) +
                                                   " features, sim.n_features is " +
                                                   std::to_string(cfg.sim.n_features));
        }
        item.features = f->second;
      }
      table->add(inst.id, std::move(item));
    }
  }

  for (const auto& v : cfg.variants) {
    if (v.backend == BackendKind::kHttp) {
      registry.add(v.spec, std::make_shared<backends::HttpBackend>(*v.http));
      continue;
    }
    backends::SimBackendConfig sc;
    sc.weights = quant::quantize_rtn(*dense, v.spec.bits(), cfg.sim.group_size);
    sc.refusal_prob = v.refusal_prob;
    sc.error_profile = v.error_profile;
    sc.seed = detail::hash_combine(world_seed, static_cast<std::uint64_t>(v.spec.bits()), v.spec.seed());
    sc.seed_noise = cfg.sim.seed_noise;
    sc.abstain_margin = cfg.sim.abstain_margin;
    sc.tasks = table;
    registry.add(v.spec, std::make_shared<backends::SimBackend>(std::move(sc)));
  }
  return registry;
}

json candidate_row(const TaskInstance& inst, const backends::GenerationResult& g, const Candidate& c) {
  json row = {{"type", "generation"},
              {"instance_id", inst.id},
              {"variant", to_json(g.source)},
              {"raw", g.text},
              {"candidate", to_json(c)},
              {"latency_ms", g.latency.count()}};
  row["candidate"].erase("source");
  if (g.transport_error) row["transport_error"] = to_json(*g.transport_error);
  return row;
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

RunReport run_benchmark(const RunConfig& cfg) {
  cfg.validate();
  const std::string started = utc_now();
  const Dataset ds = load_dataset_full(cfg.dataset_path);
  if (ds.instances.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset " + cfg.dataset_path.string() + " is empty");

  const post::RefusalLexicon lexicon =
      cfg.lexicon_path ? post::RefusalLexicon::load(*cfg.lexicon_path) : post::RefusalLexicon::defaults();
  const backends::BackendRegistry registry = build_registry(cfg, ds);

  const auto& instances = ds.instances;
  std::vector<ensemble::InstanceRecord> records(instances.size());
  backends::parallel_for_bounded(instances.size(), cfg.concurrency_limit, [&](std::size_t i) {
    records[i] = ensemble::run_instance(instances[i], cfg.ensemble, registry, lexicon, cfg.decoding);
  });

  RunReport report;
  metrics::MetricOptions options = cfg.metrics;
  if (options.positive_label.empty()) {
    const auto grouped = std::find_if(instances.begin(), instances.end(),
                                      [](const TaskInstance& t) { return t.group.has_value(); });
    if (grouped != instances.end()) {
      options.positive_label = grouped->label_space.labels.front();
      report.warnings.push_back("positive label defaulted to \"" + options.positive_label + "\"");
    }
  }

  const std::size_t m = cfg.ensemble.variants.size();
  std::vector<std::vector<metrics::Prediction>> solo_preds(m);
  std::vector<metrics::Prediction> ensemble_preds;
  std::ostringstream audit;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto& rec = records[i];
    for (std::size_t v = 0; v < m; ++v) {
      solo_preds[v].push_back(metrics::from_candidate(rec.candidates[v], inst));
      audit << candidate_row(inst, rec.generations[v], rec.candidates[v]).dump() << '\n';
      ++report.audit_rows;
    }
    ensemble_preds.push_back(metrics::from_outcome(rec.outcome, inst));
    json vote = to_json(rec.outcome);
    vote["type"] = "vote";
    vote["instance_id"] = inst.id;
    vote["gold"] = inst.gold;
    vote["kind"] = std::string(to_string(inst.kind));
    vote["ood"] = rec.ood;
    audit << vote.dump() << '\n';
    ++report.audit_rows;
  }

  for (std::size_t v = 0; v < m; ++v) {
    SoloReport s{cfg.ensemble.variants[v], metrics::compute_report(solo_preds[v], options)};
    for (const auto& w : s.metrics.warnings) report.warnings.push_back(to_string(s.variant) + ": " + w);
    report.solo.push_back(std::move(s));
  }
  report.ensemble = metrics::compute_report(ensemble_preds, options);
  for (const auto& w : report.ensemble.warnings) report.warnings.push_back("ensemble: " + w);

  report.provenance = {
      {"tool", "qpvote"},
      {"version", "0.1.0"},
      {"config_hash", cfg.config_hash},
      {"lexicon_version", lexicon.version()},
      {"generations_reused", true},
      {"n_instances", instances.size()},
      {"n_variants", m},
      {"timestamps", {{"started_at", started}, {"finished_at", utc_now()}}},
  };

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + cfg.output_dir.string() + ": " + ec.message());
  report.audit_path = cfg.output_dir / kAuditFile;
  report.report_path = cfg.output_dir / kReportFile;
  write_atomic(report.audit_path, audit.str());
  write_atomic(report.report_path, report_to_json(report).dump(2) + "\n");
  return report;
}

json report_to_json(const RunReport& report) {
  json solo = json::array();
  for (const auto& s : report.solo) solo.push_back({{"variant", to_json(s.variant)}, {"metrics", to_json(s.metrics)}});
  return {{"provenance", report.provenance},
          {"solo", std::move(solo)},
          {"ensemble", {{"metrics", to_json(report.ensemble)}}},
          {"warnings", report.warnings}};
}

json strip_volatile(json report) {
  if (report.contains("provenance") && report["provenance"].is_object()) {
    report["provenance"].erase("timestamps");
  }
  return report;
}

namespace {

std::string fmt_value(const json* v) {
  if (v == nullptr || !v->is_number()) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v->get<double>();
  return os.str();
}

void diff_section(std::ostringstream& os, const std::string& name, const json& a, const json& b) {
  std::set<std::string> keys;
  for (const json* side : {&a, &b}) {
    if (!side->is_object()) continue;
    for (auto it = side->begin(); it != side->end(); ++it) {
      if (it.value().is_number()) keys.insert(it.key());
    }
  }
  for (const auto& k : keys) {
    const json* va = a.contains(k) ? &a.at(k) : nullptr;
    const json* vb = b.contains(k) ? &b.at(k) : nullptr;
    std::string delta = "-";
    if (va && vb && va->is_number() && vb->is_number()) {
      std::ostringstream d;
      d << std::showpos << std::fixed << std::setprecision(4) << (vb->get<double>() - va->get<double>());
      delta = d.str();
    }
    os << std::left << std::setw(16) << name << std::setw(28) << k << std::right << std::setw(12)
       << fmt_value(va) << std::setw(12) << fmt_value(vb) << std::setw(12) << delta << '\n';
  }
}

std::string variant_key(const json& v) {
  return std::to_string(v.value("bits", 0)) + "b/s" + std::to_string(v.value("seed", std::uint64_t{0}));
}

}  // namespace

std::string diff_reports(const json& a, const json& b) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "section" << std::setw(28) << "metric" << std::right << std::setw(12) << "a"
     << std::setw(12) << "b" << std::setw(12) << "delta" << '\n';
  const json empty = json::object();
  auto metrics_of = [&](const json& r) -> const json& {
    if (r.contains("ensemble") && r["ensemble"].contains("metrics")) return r["ensemble"]["metrics"];
    return empty;
  };
  diff_section(os, "ensemble", metrics_of(a), metrics_of(b));

  std::map<std::string, const json*> solo_b;
  if (b.contains("solo") && b["solo"].is_array()) {
    for (const auto& s : b["solo"]) solo_b[variant_key(s.value("variant", empty))] = &s;
  }
  if (a.contains("solo") && a["solo"].is_array()) {
    for (const auto& s : a["solo"]) {
      const std::string key = variant_key(s.value("variant", empty));
      const auto it = solo_b.find(key);
      if (it == solo_b.end()) continue;
      diff_section(os, "solo " + key, s.value("metrics", empty), it->second->value("metrics", empty));
    }
  }
  return os.str();
}

}  // namespace qpv::harness
