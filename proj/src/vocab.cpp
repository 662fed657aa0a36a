/* Copyright 2026 The spkcls Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "spkcls/vocab.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"
#include "spkcls/errors.hpp"

namespace spkcls {

using nlohmann::json;

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

void Vocabulary::add(std::string token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  ids_.emplace(token, id);
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const Sample> samples, std::size_t min_count) {
  if (samples.empty()) throw ContractError("cannot build a vocabulary from no samples");
  std::map<std::string, std::size_t> counts;
  auto count = [&](const std::vector<Utterance>& utts) {
    for (const auto& u : utts) {
      for (const auto& t : u.tokens) ++counts[t];
    }
  };
  for (const auto& s : samples) {
    count(s.current);
    for (const auto& c : s.candidates) count(c.history);
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, n] : kept) {
    if (tok != "<pad>" && tok != "<unk>") v.add(tok);
  }
  return v;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnknown : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractError("token id out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::write(std::ostream& out) const {
  json j = {{"format", "spkcls-vocab"},
            {"format_version", kVocabFormatVersion},
            {"tokens", tokens_}};
  out << j.dump() << "\n";
}

Vocabulary Vocabulary::read(std::istream& in) {
  try {
    const json j = json::parse(in);
    if (j.value("format", "") != "spkcls-vocab" ||
        j.value("format_version", 0) != kVocabFormatVersion) {
      throw FormatError("vocabulary: bad header");
    }
    const auto tokens = j.at("tokens").get<std::vector<std::string>>();
    if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>") {
      throw FormatError("vocabulary: reserved ids missing");
    }
    Vocabulary v;
    for (std::size_t i = 2; i < tokens.size(); ++i) v.add(tokens[i]);
    return v;
  } catch (const json::exception& e) {
    throw FormatError(std::string("vocabulary: ") + e.what());
  }
}

namespace {

std::vector<SentenceIds> EncodeSentences(const std::vector<Utterance>& utts,
                                         const Vocabulary& vocab) {
  std::vector<SentenceIds> out;
  out.reserve(utts.size());
  for (const auto& u : utts) {
    SentenceIds ids;
    ids.reserve(u.tokens.size());
    for (const auto& t : u.tokens) ids.push_back(vocab.id(t));
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

EncodedSample encode(const Sample& sample, const Vocabulary& vocab) {
  EncodedSample e;
  e.episode_id = sample.episode_id;
  e.gold = sample.gold;
  e.current = EncodeSentences(sample.current, vocab);
  for (const auto& c : sample.candidates) {
    e.candidates.push_back({c.rank, EncodeSentences(c.history, vocab)});
  }
  return e;
}

std::vector<EncodedSample> encode_all(std::span<const Sample> samples,
                                      const Vocabulary& vocab) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode(s, vocab));
  return out;
}

}  // namespace spkcls
