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

#include "json.hpp"
#include "qpvote/backends.hpp"
#include "qpvote/core.hpp"
#include "qpvote/metrics.hpp"
#include "qpvote/simlab.hpp"

// JSON encodings shared by the dataset, report, audit, and simulate formats.
namespace qpv {

using json = nlohmann::json;

json to_json(const PrecisionSpec& spec);
PrecisionSpec precision_from_json(const json& j);

// Dataset-line shape: {id, prompt, labels, gold, group?, kind, allows_refusal}.
json to_json(const TaskInstance& inst);
// Throws kValidationError on missing or mistyped fields. Gold is matched to a
// label case-insensitively and stored in canonical form; the result is validated.
TaskInstance instance_from_json(const json& j);

json to_json(const Candidate& c);
json to_json(const VoteOutcome& o);
json to_json(const backends::TransportError& e);

json to_json(const metrics::MetricReport& r);

json to_json(const simlab::SimReport& r);
simlab::SimProfile profile_from_json(const json& j);

}  // namespace qpv
