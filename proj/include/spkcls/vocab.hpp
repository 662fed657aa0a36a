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
#ifndef SPKCLS_VOCAB_HPP_
#define SPKCLS_VOCAB_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spkcls/corpus.hpp"

namespace spkcls {

using TokenId = std::int32_t;

inline constexpr int kVocabFormatVersion = 1;

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnknown = 1;

  Vocabulary();

  // Counts every token of the current blocks and candidate histories. Tokens
  // seen fewer than min_count times map to kUnknown. Ids are assigned by
  // descending count, ties broken lexicographically. Throws ContractError on
  // an empty sample set.
  static Vocabulary build(std::span<const Sample> samples, std::size_t min_count);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }

  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

using SentenceIds = std::vector<TokenId>;

struct EncodedCandidate {
  int rank = 0;
  std::vector<SentenceIds> history;
};

// Integer-id view of a Sample; never fails on unseen tokens.
struct EncodedSample {
  std::string episode_id;
  std::vector<SentenceIds> current;
  std::vector<EncodedCandidate> candidates;
  std::size_t gold = 0;

  std::size_t k() const { return candidates.size(); }
};

EncodedSample encode(const Sample& sample, const Vocabulary& vocab);
std::vector<EncodedSample> encode_all(std::span<const Sample> samples,
                                      const Vocabulary& vocab);

}  // namespace spkcls

#endif  // SPKCLS_VOCAB_HPP_
