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

#include "qpvote/postprocess.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>

#include "text_util.hpp"

namespace qpv::post {

RefusalLexicon::RefusalLexicon(std::vector<std::string> phrases, std::string version)
    : phrases_(std::move(phrases)), version_(std::move(version)) {
  if (phrases_.empty()) throw Error(ErrorCode::kInvalidArgument, "refusal lexicon is empty");
  std::set<std::string> seen;
  for (const auto& p : phrases_) {
    if (detail::is_blank(p)) throw Error(ErrorCode::kInvalidArgument, "blank refusal phrase");
    if (detail::ascii_lower(p) != p) {
      throw Error(ErrorCode::kInvalidArgument, "refusal phrase \"" + p + "\" is not lowercase");
    }
    if (!seen.insert(p).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate refusal phrase \"" + p + "\"");
    }
  }
}

const RefusalLexicon& RefusalLexicon::defaults() {
  // Mirrors data/refusal_lexicon_v1.txt.
  static const RefusalLexicon lex(
      {
          "i don't know",
          "i do not know",
          "i cannot",
          "i can't answer",
          "i can't determine",
          "as an ai",
          "i'm not able to",
          "i am not able to",
          "i'm unable to",
          "i am unable to",
          "i'm not sure",
          "i am not sure",
          "cannot be determined",
          "i won't answer",
          "i refuse",
      },
      kDefaultLexiconVersion);
  return lex;
}

RefusalLexicon RefusalLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open lexicon " + path.string());
  std::vector<std::string> phrases;
  std::string version = path.stem().string();
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      constexpr std::string_view kTag = "version:";
      const std::string_view body = detail::trim(t.substr(1));
      if (body.substr(0, kTag.size()) == kTag) version = std::string(detail::trim(body.substr(kTag.size())));
      continue;
    }
    phrases.emplace_back(t);
  }
  return RefusalLexicon(std::move(phrases), std::move(version));
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

struct Span {
  std::size_t begin;
  std::size_t end;
  std::size_t label;  // index into the label space
};

std::vector<Span> find_whole_word(const std::string& hay, const std::string& needle, std::size_t tag) {
  std::vector<Span> out;
  if (needle.empty()) return out;
  const bool need_left = is_word_byte(static_cast<unsigned char>(needle.front()));
  const bool need_right = is_word_byte(static_cast<unsigned char>(needle.back()));
  for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const std::size_t end = pos + needle.size();
    if (need_left && pos > 0 && is_word_byte(static_cast<unsigned char>(hay[pos - 1]))) continue;
    if (need_right && end < hay.size() && is_word_byte(static_cast<unsigned char>(hay[end]))) continue;
    out.push_back({pos, end, tag});
  }
  return out;
}

bool inside(const Span& inner, const Span& outer) {
  return outer.begin <= inner.begin && inner.end <= outer.end &&
         (outer.end - outer.begin) > (inner.end - inner.begin);
}

enum class Outcome { kLabel, kRefusal, kMultiLabel, kUnparseable };

struct Match {
  Outcome outcome;
  std::size_t label = 0;
};

Match classify(std::string_view text, const LabelSpace& space, const RefusalLexicon& lex) {
  if (detail::is_blank(text)) return {Outcome::kUnparseable};
  const std::string window = normalize_window(text);

  std::vector<Span> refusals;
  for (std::size_t i = 0; i < lex.phrases().size(); ++i) {
    auto found = find_whole_word(window, normalize_window(lex.phrases()[i]), i);
    refusals.insert(refusals.end(), found.begin(), found.end());
  }

  std::vector<Span> labels;
  for (std::size_t i = 0; i < space.labels.size(); ++i) {
    auto found = find_whole_word(window, normalize_window(space.labels[i]), i);
    labels.insert(labels.end(), found.begin(), found.end());
  }
  std::vector<Span> kept;
  for (const Span& s : labels) {
    const bool shadowed =
        std::any_of(labels.begin(), labels.end(), [&](const Span& o) { return inside(s, o); }) ||
        std::any_of(refusals.begin(), refusals.end(), [&](const Span& o) {
          return o.begin <= s.begin && s.end <= o.end;
        });
    if (!shadowed) kept.push_back(s);
  }

  std::set<std::size_t> distinct;
  std::optional<std::size_t> first_label_pos;
  for (const Span& s : kept) {
    distinct.insert(s.label);
    if (!first_label_pos || s.begin < *first_label_pos) first_label_pos = s.begin;
  }
  std::optional<std::size_t> first_refusal_pos;
  for (const Span& s : refusals) {
    if (!first_refusal_pos || s.begin < *first_refusal_pos) first_refusal_pos = s.begin;
  }

  if (distinct.size() >= 2) return {Outcome::kMultiLabel};
  if (distinct.size() == 1) {
    if (!first_refusal_pos || *first_label_pos < *first_refusal_pos) {
      return {Outcome::kLabel, *distinct.begin()};
    }
    return {Outcome::kRefusal};
  }
  if (first_refusal_pos) return {Outcome::kRefusal};
  return {Outcome::kUnparseable};
}

Candidate to_candidate(const Match& m, std::string_view text, const LabelSpace& space,
                       const PrecisionSpec& source, bool ood) {
  std::string raw(text);
  switch (m.outcome) {
    case Outcome::kLabel: return make_label(source, space.labels[m.label], std::move(raw));
    case Outcome::kRefusal:
      return ood ? make_label(source, std::string(kRefusedLabel), std::move(raw))
                 : make_refusal(source, std::move(raw));
    case Outcome::kMultiLabel: return make_invalid(source, "multi-label", std::move(raw));
    case Outcome::kUnparseable: break;
  }
  return make_invalid(source, "unparseable", std::move(raw));
}

}  // namespace

std::string normalize_window(std::string_view text) {
  std::string out;
  out.reserve(std::min(text.size(), kScanWindowChars * 4));
  std::size_t chars = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool continuation = (c & 0xC0) == 0x80;
    if (!continuation && ++chars > kScanWindowChars) break;
    // U+2018 / U+2019 (E2 80 98 / E2 80 99) -> '
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x98 ||
         static_cast<unsigned char>(text[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back(detail::ascii_lower(static_cast<char>(c)));
  }
  return out;
}

Candidate extract_candidate(std::string_view text, const LabelSpace& space,
                            const RefusalLexicon& lex, const PrecisionSpec& source) {
  return to_candidate(classify(text, space, lex), text, space, source, /*ood=*/false);
}

Candidate extract_candidate_ood(std::string_view text, const LabelSpace& space,
                                const RefusalLexicon& lex, const PrecisionSpec& source) {
  if (!space.allows_refusal_label) {
    throw Error(ErrorCode::kContractError, "OOD extraction needs a label space that allows REFUSED");
  }
  return to_candidate(classify(text, space, lex), text, space, source, /*ood=*/true);
}

}  // namespace qpv::post
