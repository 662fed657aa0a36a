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
#ifndef SPKCLS_SYNTH_HPP_
#define SPKCLS_SYNTH_HPP_

// Planted-signal transcript generators.
//
// Episodes are sequences of turns; a turn is a block of one to three
// utterances by one speaker, and consecutive turns always change speaker.
//
//   temporal: with probability p_repeat the next speaker is the most recent
//             speaker other than the current one, else uniform over the
//             remaining speakers. Tokens come from a shared vocabulary.
//   content:  the next speaker is uniform over the other speakers; each
//             persona owns a disjoint keyword set and every utterance draws
//             ceil(keyword_rate * length) tokens from it.
//   mixed:    content-style vocabularies with temporal speaker selection.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spkcls/corpus.hpp"

namespace spkcls {

enum class SynthKind { kTemporal, kContent, kMixed };

std::string_view synth_kind_name(SynthKind kind);
SynthKind parse_synth_kind(std::string_view name);

struct SynthConfig {
  SynthKind kind = SynthKind::kTemporal;
  int episodes = 10;
  std::uint64_t seed = 0;
  int speakers_per_episode = 5;
  int persona_pool = 20;
  int keywords_per_persona = 8;
  int shared_vocab = 200;
  int turns_per_episode = 60;
  double p_repeat = 0.75;
  double keyword_rate = 0.6;
  int min_tokens = 5;
  int max_tokens = 10;
};

// Kind-specific defaults: keyword_rate 0 for temporal, 0.6 for content, and a
// weaker 0.25 for mixed so neither signal alone saturates.
SynthConfig default_synth_config(SynthKind kind, int episodes, std::uint64_t seed);

struct SynthCorpus {
  std::vector<Utterance> utterances;  // episodes back to back, in order
  std::map<std::string, std::vector<std::string>> keywords;  // persona -> set
};

// Throws ContractError when episodes <= 0 or the config is inconsistent.
SynthCorpus gen_synthetic(const SynthConfig& config);

std::string persona_name(int persona);

// Renders one episode's utterances in `NAME: text` transcript form.
std::string to_transcript(const std::vector<Utterance>& episode);

}  // namespace spkcls

#endif  // SPKCLS_SYNTH_HPP_
