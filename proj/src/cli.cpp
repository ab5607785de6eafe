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

#include "qpvote/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hash_util.hpp"
#include "qpvote/harness.hpp"
#include "qpvote/kernels.hpp"
#include "qpvote/quantizer.hpp"
#include "qpvote/serialize.hpp"

namespace qpv::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorCode::kParseError, path + " is not valid JSON");
  return doc;
}

void print_metric_row(std::ostream& out, const std::string& who, const json& m) {
  auto cell = [&](const char* key) {
    std::ostringstream os;
    if (m.contains(key)) {
      os << std::fixed << std::setprecision(4) << m.at(key).get<double>();
    } else {
      os << "-";
    }
    return os.str();
  };
  out << std::left << std::setw(12) << who << std::right << std::setw(10) << cell("accuracy") << std::setw(10)
      << cell("refusal_rate") << std::setw(12) << cell("macc") << std::setw(12) << cell("ood_score")
      << std::setw(14) << cell("ethics_score") << std::setw(16) << cell("fairness_score") << '\n';
}

int cmd_run(const std::string& config_path, const std::string& output_dir, std::ostream& out) {
  harness::RunConfig cfg = harness::load_run_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  const harness::RunReport report = harness::run_benchmark(cfg);
  const json j = harness::report_to_json(report);

  out << std::left << std::setw(12) << "variant" << std::right << std::setw(10) << "acc" << std::setw(10)
      << "refusal" << std::setw(12) << "macc" << std::setw(12) << "ood" << std::setw(14) << "ethics"
      << std::setw(16) << "fairness" << '\n';
  for (const auto& s : j["solo"]) {
    print_metric_row(out, to_string(precision_from_json(s["variant"])), s["metrics"]);
  }
  print_metric_row(out, "ensemble", j["ensemble"]["metrics"]);
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  out << "report: " << report.report_path.string() << '\n' << "audit:  " << report.audit_path.string() << " ("
      << report.audit_rows << " rows)\n";
  return kExitOk;
}

int cmd_simulate(const std::string& profile_path, std::optional<std::size_t> n, std::optional<std::uint64_t> seed,
                 std::ostream& out) {
  const json doc = read_json_file(profile_path);
  simlab::SimProfile profile = profile_from_json(doc);
  if (seed) profile.seed = *seed;
  const std::size_t n_instances = n.value_or(doc.value("n_instances", std::size_t{5000}));
  const simlab::SimReport rep = simlab::monte_carlo(profile, n_instances);
  json j = to_json(rep);
  if (profile.pairwise_error_correlation == 0.0 && profile.m <= 12) {
    j["expected_error_rate"] = simlab::brute_force_vote_error(profile);
  } else if (profile.m <= 12) {
    j["expected_error_rate"] = simlab::expected_vote_error(profile);
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_quantize_demo(const std::vector<int>& bits, std::size_t rows, std::size_t cols, std::size_t group_size,
                      std::uint64_t seed, std::ostream& out) {
  std::vector<double> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = detail::normal_from_hash(detail::hash_combine(seed, i));
  }
  const quant::TensorF t(rows, cols, std::move(data));
  out << "tensor " << rows << "x" << cols << ", group_size " << group_size << ", kernels "
      << simd::to_string(simd::active_isa()) << '\n';
  out << std::left << std::setw(6) << "bits" << std::right << std::setw(14) << "max_err" << std::setw(14)
      << "mean_abs_err" << std::setw(14) << "max_scale/2" << '\n';
  for (int b : bits) {
    const quant::QuantizedTensor q = quant::quantize_rtn(t, b, group_size);
    const quant::TensorF back = quant::dequantize(q);
    double max_err = 0.0;
    double sum_err = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::fabs(t.data()[i] - back.data()[i]);
      max_err = std::max(max_err, e);
      sum_err += e;
    }
    double max_scale = 0.0;
    for (double s : q.scales) max_scale = std::max(max_scale, s);
    out << std::left << std::setw(6) << b << std::right << std::scientific << std::setprecision(4)
        << std::setw(14) << max_err << std::setw(14) << sum_err / static_cast<double>(t.size()) << std::setw(14)
        << max_scale / 2 << std::defaultfloat << '\n';
  }
  return kExitOk;
}

int cmd_report_diff(const std::string& a, const std::string& b, std::ostream& out) {
  out << harness::diff_reports(read_json_file(a), read_json_file(b));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qpvote: precision-ensemble voting and trustworthiness benchmarks", "qpvote"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run a benchmark described by a JSON config");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "Override the config's output_dir");

  std::string profile_path;
  std::optional<std::size_t> n_instances;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo an ensemble profile; prints a SimReport as JSON");
  simulate->add_option("--profile", profile_path, "Simulation profile (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--n", n_instances, "Number of simulated instances (default 5000)");
  simulate->add_option("--seed", sim_seed, "Override the profile seed");

  std::vector<int> bits;
  std::size_t rows = 16;
  std::size_t cols = 64;
  std::size_t group_size = 32;
  std::uint64_t q_seed = 0;
  auto* qdemo = app.add_subcommand("quantize-demo", "Round-to-nearest reconstruction error per bit-width");
  qdemo->add_option("--bits", bits, "Bit-widths, e.g. 3,4,8")->required()->delimiter(',')->check(CLI::Range(2, 16));
  qdemo->add_option("--rows", rows)->check(CLI::PositiveNumber);
  qdemo->add_option("--cols", cols)->check(CLI::PositiveNumber);
  qdemo->add_option("--group-size", group_size)->check(CLI::PositiveNumber);
  qdemo->add_option("--seed", q_seed);

  std::vector<std::string> diff;
  auto* report = app.add_subcommand("report", "Compare two run reports");
  report->add_option("--diff", diff, "Two report.json files")->required()->expected(2)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "qpvote: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, output_dir, out);
    if (simulate->parsed()) return cmd_simulate(profile_path, n_instances, sim_seed, out);
    if (qdemo->parsed()) return cmd_quantize_demo(bits, rows, cols, group_size, q_seed, out);
    if (report->parsed()) return cmd_report_diff(diff[0], diff[1], out);
  } catch (const UsageError& e) {
    err << "qpvote: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "qpvote: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace qpv::cli
