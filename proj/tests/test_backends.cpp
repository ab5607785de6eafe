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

#include <cmath>
#include <set>
#include <stop_token>

#include "doctest.h"
#include "fake_backend.hpp"
#include "qpvote/postprocess.hpp"
#include "qpvote/quantizer.hpp"
#include "qpvote/sim_backend.hpp"
#include "test_support.hpp"

using namespace qpv;
using namespace qpv::backends;
using namespace std::chrono_literals;

namespace {

const GenerationRequest kReq{"q1", "prompt", {}};

std::vector<PrecisionSpec> specs(std::initializer_list<int> bits) {
  std::vector<PrecisionSpec> out;
  for (int b : bits) out.emplace_back(b, 0);
  return out;
}

// Two labels, two features: label "cat" points along x, "dog" along y.
SimBackendConfig two_feature_config(int bits, double refusal_prob, std::vector<double> features) {
  auto tasks = std::make_shared<ToyTaskTable>();
  tasks->add("toy", ToyItem{{"cat", "dog"}, std::move(features)});
  const quant::TensorF dense(2, 2, {1.0, 0.0, 0.0, 1.0});
  return SimBackendConfig{quant::quantize_rtn(dense, bits, 2), refusal_prob, {}, 0, 0.0, 0.0, tasks};
}

}  // namespace

TEST_CASE("registry") {
  BackendRegistry reg;
  auto b = std::make_shared<test::ScriptedBackend>(std::map<PrecisionSpec, std::string>{{{8, 0}, "A"}});
  reg.add({8, 0}, b);
  CHECK(reg.contains({8, 0}));
  CHECK_FALSE(reg.contains({4, 0}));
  QPV_CHECK_THROWS_CODE(reg.add({8, 0}, b), ErrorCode::kDuplicateVariant);
  const auto unknown = reg.generate({4, 0}, kReq);
  REQUIRE(unknown.transport_error.has_value());
  CHECK(unknown.transport_error->kind == TransportErrorKind::kUnknownVariant);
}

TEST_CASE("exceptions escaping a backend become transport failures") {
  BackendRegistry reg;
  reg.add({8, 0}, std::make_shared<test::ScriptedBackend>(std::map<PrecisionSpec, std::string>{{{8, 0}, "!throw"}}));
  const auto r = reg.generate({8, 0}, kReq);
  REQUIRE(r.transport_error.has_value());
  CHECK(r.transport_error->kind == TransportErrorKind::kTransportFailure);
}

TEST_CASE("fan-out keeps input order and isolates failures") {
  const auto vs = specs({8, 4, 3});
  auto b = std::make_shared<test::ScriptedBackend>(
      std::map<PrecisionSpec, std::string>{{vs[0], "A"}, {vs[1], "!timeout"}, {vs[2], "C"}}, 5ms);
  BackendRegistry reg;
  for (const auto& v : vs) reg.add(v, b);
  const auto rs = generate_ensemble(reg, vs, kReq, {3, {}});
  REQUIRE(rs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rs[i].source == vs[i]);
  CHECK(rs[0].text == "A");
  CHECK(rs[1].transport_error->kind == TransportErrorKind::kTimeout);
  CHECK(rs[2].text == "C");
}

TEST_CASE("single variant") {
  const auto vs = specs({8});
  BackendRegistry reg;
  reg.add(vs[0], std::make_shared<test::ScriptedBackend>(std::map<PrecisionSpec, std::string>{{vs[0], "x"}}));
  const auto rs = generate_ensemble(reg, vs, kReq);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].text == "x");
}

TEST_CASE("concurrency limit bounds in-flight requests and does not change results") {
  const auto vs = specs({16, 12, 8, 6, 5, 4, 3, 2});
  std::map<PrecisionSpec, std::string> script;
  for (const auto& v : vs) script[v] = "out-" + to_string(v);
  std::vector<std::string> reference;
  for (std::size_t limit : {1u, 2u, 3u, 8u}) {
    CAPTURE(limit);
    auto b = std::make_shared<test::ScriptedBackend>(script, 10ms);
    BackendRegistry reg;
    for (const auto& v : vs) reg.add(v, b);
    const auto rs = generate_ensemble(reg, vs, kReq, {limit, {}});
    CHECK(b->max_in_flight() <= static_cast<int>(limit));
    std::vector<std::string> texts;
    for (const auto& r : rs) texts.push_back(r.text);
    if (reference.empty()) reference = texts;
    CHECK(texts == reference);
  }
}

TEST_CASE("a stop request cancels variants that have not started") {
  const auto vs = specs({8, 4, 3});
  auto b = std::make_shared<test::ScriptedBackend>(
      std::map<PrecisionSpec, std::string>{{vs[0], "A"}, {vs[1], "B"}, {vs[2], "C"}});
  BackendRegistry reg;
  for (const auto& v : vs) reg.add(v, b);
  std::stop_source src;
  src.request_stop();
  const auto rs = generate_ensemble(reg, vs, kReq, {1, src.get_token()});
  REQUIRE(rs.size() == 3);
  for (const auto& r : rs) {
    REQUIRE(r.transport_error.has_value());
    CHECK(r.transport_error->kind == TransportErrorKind::kCancelled);
  }
  CHECK(b->calls() == 0);
}

TEST_CASE("parallel_for_bounded visits each index once and rethrows") {
  std::vector<std::atomic<int>> seen(100);
  parallel_for_bounded(seen.size(), 4, [&](std::size_t i) { ++seen[i]; });
  for (const auto& s : seen) CHECK(s.load() == 1);
  CHECK_THROWS_AS(parallel_for_bounded(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("simulated backend: forced refusal") {
  SimBackend b(two_feature_config(8, 1.0, {1.0, 0.0}));
  const auto r = b.generate({8, 0}, {"toy", "p", {}});
  CHECK(r.text == kSimRefusalText);
  CHECK(post::extract_candidate(r.text, LabelSpace{{"cat", "dog"}, false}, post::RefusalLexicon::defaults(), {8, 0})
            .is_refusal());
}

TEST_CASE("simulated backend: separable two-feature instance answers the gold label") {
  // Scores at 8 bits: cat = 1*2 + 0*0.5 = 2, dog = 0*2 + 1*0.5 = 0.5 -> cat.
  for (int bits : {2, 3, 8}) {
    SimBackend b(two_feature_config(bits, 0.0, {2.0, 0.5}));
    const auto r = b.generate({bits, 0}, {"toy", "p", {}});
    REQUIRE(r.ok());
    const std::set<std::string> forms = {"cat", "The answer is cat.", "Answer: cat"};
    CHECK(forms.count(r.text) == 1);
  }
  SimBackend flipped(two_feature_config(8, 0.0, {0.1, 3.0}));
  CHECK(post::extract_candidate(flipped.generate({8, 0}, {"toy", "p", {}}).text, LabelSpace{{"cat", "dog"}, false},
                                post::RefusalLexicon::defaults(), {8, 0})
            .label() == "dog");
}

TEST_CASE("simulated backend: error profile bias and abstain margin") {
  auto cfg = two_feature_config(8, 0.0, {2.0, 0.5});
  cfg.error_profile = {{"dog", 2.0}};  // dog now scores 2.5 > 2
  SimBackend biased(cfg);
  CHECK(biased.generate({8, 0}, {"toy", "p", {}}).text.find("dog") != std::string::npos);

  cfg = two_feature_config(8, 0.0, {2.0, 0.5});
  cfg.abstain_margin = 2.0;  // margin is 1.5
  SimBackend timid(cfg);
  CHECK(timid.generate({8, 0}, {"toy", "p", {}}).text == kSimRefusalText);
}

TEST_CASE("simulated backend: unknown instance and bad config") {
  SimBackend b(two_feature_config(8, 0.0, {1.0, 0.0}));
  const auto r = b.generate({8, 0}, {"nope", "p", {}});
  REQUIRE(r.transport_error.has_value());
  CHECK(r.transport_error->kind == TransportErrorKind::kTransportFailure);
  QPV_CHECK_THROWS_CODE(SimBackend(two_feature_config(8, 1.5, {1.0, 0.0})), ErrorCode::kInvalidArgument);
  auto cfg = two_feature_config(8, 0.0, {1.0, 0.0});
  cfg.tasks.reset();
  QPV_CHECK_THROWS_CODE(SimBackend(cfg), ErrorCode::kInvalidArgument);
}

TEST_CASE("simulated backend is a pure function of config and request") {
  auto tasks = std::make_shared<ToyTaskTable>();
  const auto dense = make_dense_weights(4, 8, 3);
  const auto inst = test::make_instance("x1", {"A", "B", "C", "D"}, "C");
  tasks->add("x1", make_toy_item(inst, dense, {1.0, 0.8, 3}));
  SimBackend b(SimBackendConfig{quant::quantize_rtn(dense, 4, 4), 0.2, {}, 11, 0.5, 0.0, tasks});
  const auto first = b.generate({4, 11}, {"x1", "p", {}}).text;
  for (int i = 0; i < 10; ++i) CHECK(b.generate({4, 11}, {"x1", "p", {}}).text == first);
  SimBackend twin(SimBackendConfig{quant::quantize_rtn(dense, 4, 4), 0.2, {}, 11, 0.5, 0.0, tasks});
  CHECK(twin.generate({4, 11}, {"x1", "p", {}}).text == first);
}

TEST_CASE("bit-width alone changes the error pattern over 500 instances") {
  const std::size_t n_labels = 4, n_features = 8;
  const auto dense = make_dense_weights(n_labels, n_features, 99);
  auto tasks = std::make_shared<ToyTaskTable>();
  std::vector<TaskInstance> insts;
  for (int i = 0; i < 500; ++i) {
    const std::vector<std::string> labels = {"A", "B", "C", "D"};
    insts.push_back(test::make_instance("i" + std::to_string(i), labels, labels[i % 4]));
    tasks->add(insts.back().id, make_toy_item(insts.back(), dense, {1.2, 0.6, 99}));
  }
  // Same seed and no seed noise: any difference comes from quantization.
  auto errors = [&](int bits) {
    SimBackend b(SimBackendConfig{quant::quantize_rtn(dense, bits, 4), 0.0, {}, 0, 0.0, 0.0, tasks});
    std::set<std::string> wrong;
    for (const auto& inst : insts) {
      const auto c = post::extract_candidate(b.generate({bits, 0}, {inst.id, inst.prompt, {}}).text,
                                             inst.label_space, post::RefusalLexicon::defaults(), {bits, 0});
      if (!c.is_label() || c.label() != inst.gold) wrong.insert(inst.id);
    }
    return wrong;
  };
  const auto e3 = errors(3);
  const auto e8 = errors(8);
  CHECK_FALSE(e3.empty());
  CHECK_FALSE(e8.empty());
  CHECK(e3 != e8);
}

TEST_CASE("toy item construction") {
  const auto dense = make_dense_weights(2, 3, 1);
  CHECK(dense == make_dense_weights(2, 3, 1));
  CHECK_FALSE(dense == make_dense_weights(2, 3, 2));
  const auto inst = test::make_instance("t", {"A", "B"}, "B");
  const auto clean = make_toy_item(inst, dense, {2.0, 0.0, 1});
  // Zero noise: features are exactly margin * unit(row of B).
  double norm = 0.0;
  for (double v : dense.row(1)) norm += v * v;
  norm = std::sqrt(norm);
  for (std::size_t j = 0; j < 3; ++j) CHECK(clean.features[j] == doctest::Approx(2.0 * dense.at(1, j) / norm));
  auto ood = test::make_instance("o", {"A", "B"}, "REFUSED", TaskKind::kOodOutOfScope);
  const auto noise_only = make_toy_item(ood, dense, {2.0, 0.0, 1});
  for (double v : noise_only.features) CHECK(v == 0.0);
}
