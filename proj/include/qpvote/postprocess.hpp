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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qpvote/core.hpp"

namespace qpv::post {

inline constexpr std::size_t kScanWindowChars = 512;
inline constexpr const char* kDefaultLexiconVersion = "refusal-lexicon-v1";

class RefusalLexicon {
 public:
  // Throws kInvalidArgument when phrases are empty, duplicated, or not lowercase.
  RefusalLexicon(std::vector<std::string> phrases, std::string version);

  static const RefusalLexicon& defaults();

  // One phrase per line, UTF-8, '#' starts a comment; a "# version: <tag>"
  // comment sets the version (defaults to the file stem).
  static RefusalLexicon load(const std::filesystem::path& path);

  const std::vector<std::string>& phrases() const noexcept { return phrases_; }
  const std::string& version() const noexcept { return version_; }

 private:
  std::vector<std::string> phrases_;
  std::string version_;
};

// Rules, applied to the first 512 characters, matching whole words case-insensitively:
//   1. exactly one label, no refusal phrase      -> Label
//   2. two or more distinct labels               -> Invalid("multi-label")
//   3. a refusal phrase, no label                -> Refusal
//   4. one label and a refusal phrase            -> Label if the label comes first, else Refusal
//   5. empty, whitespace, or nothing matched     -> Invalid("unparseable")
// A label occurrence inside a longer label's occurrence, or inside a refusal
// phrase, does not count.
Candidate extract_candidate(std::string_view text, const LabelSpace& space,
                            const RefusalLexicon& lex, const PrecisionSpec& source);

// As extract_candidate, but refusals become Label("REFUSED").
// Throws kContractError unless space.allows_refusal_label.
Candidate extract_candidate_ood(std::string_view text, const LabelSpace& space,
                                const RefusalLexicon& lex, const PrecisionSpec& source);

// Lowercased scan window with typographic apostrophes folded to '\''.
std::string normalize_window(std::string_view text);

}  // namespace qpv::post
