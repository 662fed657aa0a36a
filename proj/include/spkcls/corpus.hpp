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
#ifndef SPKCLS_CORPUS_HPP_
#define SPKCLS_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spkcls {

using Tokens = std::vector<std::string>;

inline constexpr std::size_t kUnknownSeq = std::numeric_limits<std::size_t>::max();

// One speaker-attributed line group. Within an episode seq_index strictly
// increases; utterances loaded back from JSONL carry kUnknownSeq.
struct Utterance {
  std::string speaker;
  Tokens tokens;
  std::string episode_id;
  std::size_t seq_index = kUnknownSeq;
};

struct Candidate {
  std::string name;
  int rank = 0;                    // 1 = most recently active
  std::vector<Utterance> history;  // oldest first
};

struct Sample {
  std::string episode_id;
  std::vector<Utterance> current;
  std::vector<Candidate> candidates;  // sorted by rank
  std::size_t gold = 0;

  std::size_t n() const { return current.size(); }
  std::size_t k() const { return candidates.size(); }
  int gold_rank() const { return candidates[gold].rank; }
};

struct SampleRules {
  std::size_t k_max = 5;
  std::size_t min_hist = 3;
  std::size_t max_hist = 5;
  std::size_t n_max = 5;
  std::size_t max_tokens = 50;
};

struct BuildStats {
  std::size_t blocks = 0;
  std::size_t emitted = 0;
  std::size_t gold_not_candidate = 0;
  std::size_t short_history = 0;

  BuildStats& operator+=(const BuildStats& o);
};

// Lowercases, splits on whitespace, and emits every ASCII punctuation
// character as its own token.
Tokens tokenize(std::string_view text);

// Uppercases and collapses internal whitespace.
std::string normalize_speaker(std::string_view name);

struct ParseResult {
  std::vector<Utterance> utterances;
  std::size_t skipped_lines = 0;  // text before the first speaker tag
};

// Parses `NAME: text` transcripts. A speaker tag is the text before the first
// colon when it is short, contains a letter, and has no lowercase letters
// (the broadcast-transcript convention); any other non-blank line continues
// the previous utterance. Parenthesized stage directions are removed before
// tagging, and utterances left without tokens are dropped.
ParseResult parse_transcript(std::string_view raw, std::string_view episode_id);

// Turns consecutive same-episode runs of utterances into samples. Each
// maximal same-speaker block becomes one candidate sample whose candidates
// are the k_max most recently active speakers strictly before the block.
// Throws ContractError if seq_index is not increasing within an episode.
std::vector<Sample> build_samples(std::span<const Utterance> utterances,
                                  const SampleRules& rules = {},
                                  BuildStats* stats = nullptr);

// Throws ContractError describing the first violated Sample invariant.
void validate_sample(const Sample& sample, const SampleRules& rules = {});

// ---------------------------------------------------------------------------
// Episode-level splits.

enum class Partition { kTrain, kValidation, kTest };

std::string_view partition_name(Partition p);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

std::uint64_t episode_hash(std::string_view episode_id, std::uint64_t seed);

// Orders episodes by seeded hash and cuts the order by the ratios, giving
// every partition at least one episode. Throws ContractError for invalid
// ratios or fewer than three episodes.
std::map<std::string, Partition> assign_partitions(
    std::span<const std::string> episode_ids, const SplitRatios& ratios,
    std::uint64_t seed);

CorpusSplit split_by_episode(std::vector<Sample> samples,
                             const SplitRatios& ratios, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Processed-corpus files.
//
// A samples file is JSON Lines: a header object
//   {"format": "spkcls-samples", "format_version": 1}
// followed by one object per sample with exactly the keys
//   episode_id, current, candidates [{name, rank, history}], gold.

inline constexpr int kSamplesFormatVersion = 1;
inline constexpr int kStatsFormatVersion = 1;

void write_samples(std::ostream& out, std::span<const Sample> samples);
std::vector<Sample> read_samples(std::istream& in);

struct CorpusStats {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  BuildStats build;
  std::size_t episodes = 0;
  std::size_t skipped_lines = 0;
};

void write_stats_json(std::ostream& out, const CorpusStats& stats);
CorpusStats read_stats_json(std::istream& in);
// Two-column "Data partition / # of samples" table.
void write_stats_table(std::ostream& out, const CorpusStats& stats);

}  // namespace spkcls

#endif  // SPKCLS_CORPUS_HPP_
