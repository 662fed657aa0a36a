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
#include "spkcls/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "spkcls/errors.hpp"

namespace spkcls {

using nlohmann::json;

BuildStats& BuildStats::operator+=(const BuildStats& o) {
  blocks += o.blocks;
  emitted += o.emitted;
  gold_not_candidate += o.gold_not_candidate;
  short_history += o.short_history;
  return *this;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      word.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

std::string normalize_speaker(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::toupper(c)));
  }
  return out;
}

namespace {

std::string StripStageDirections(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '(') {
      const std::size_t close = line.find(')', i + 1);
      if (close == std::string_view::npos) {
        out.append(line.substr(i));
        break;
      }
      out.push_back(' ');
      i = close + 1;
    } else {
      out.push_back(line[i++]);
    }
  }
  return out;
}

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Returns the tag length (position of the colon) or npos.
std::size_t SpeakerTagEnd(std::string_view line) {
  const std::size_t colon = line.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon > 64) {
    return std::string_view::npos;
  }
  if (colon + 1 < line.size() &&
      !std::isspace(static_cast<unsigned char>(line[colon + 1]))) {
    return std::string_view::npos;
  }
  bool has_letter = false;
  for (char ch : line.substr(0, colon)) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::islower(c)) return std::string_view::npos;
    if (std::isupper(c)) {
      has_letter = true;
      continue;
    }
    if (std::isdigit(c) || std::isspace(c) || c >= 0x80) continue;
    if (c == '.' || c == ',' || c == '\'' || c == '-' || c == '&' || c == '/') {
      continue;
    }
    return std::string_view::npos;
  }
  return has_letter ? colon : std::string_view::npos;
}

}  // namespace

ParseResult parse_transcript(std::string_view raw, std::string_view episode_id) {
  ParseResult result;
  std::vector<Utterance> groups;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t end = raw.find('\n', pos);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;

    const std::string cleaned = StripStageDirections(line);
    if (IsBlank(cleaned)) continue;
    const std::size_t tag_end = SpeakerTagEnd(cleaned);
    if (tag_end != std::string_view::npos) {
      Utterance u;
      u.speaker = normalize_speaker(std::string_view(cleaned).substr(0, tag_end));
      u.episode_id = std::string(episode_id);
      u.tokens = tokenize(std::string_view(cleaned).substr(tag_end + 1));
      groups.push_back(std::move(u));
    } else if (groups.empty()) {
      ++result.skipped_lines;
    } else {
      Tokens more = tokenize(cleaned);
      auto& dst = groups.back().tokens;
      dst.insert(dst.end(), std::make_move_iterator(more.begin()),
                 std::make_move_iterator(more.end()));
    }
  }
  for (auto& u : groups) {
    if (u.tokens.empty()) continue;
    u.seq_index = result.utterances.size();
    result.utterances.push_back(std::move(u));
  }
  return result;
}

namespace {

Utterance Truncated(const Utterance& u, std::size_t max_tokens) {
  Utterance out = u;
  if (out.tokens.size() > max_tokens) out.tokens.resize(max_tokens);
  return out;
}

void BuildEpisode(std::span<const Utterance> utts, const SampleRules& rules,
                  std::vector<Sample>& out, BuildStats& stats) {
  std::unordered_map<std::string, std::size_t> last_pos;
  std::unordered_map<std::string, std::vector<std::size_t>> spoken;
  std::size_t i = 0;
  while (i < utts.size()) {
    std::size_t j = i;
    while (j < utts.size() && utts[j].speaker == utts[i].speaker) ++j;
    ++stats.blocks;

    std::vector<std::pair<std::size_t, std::string>> recency;
    recency.reserve(last_pos.size());
    for (const auto& [name, p] : last_pos) recency.emplace_back(p, name);
    std::sort(recency.begin(), recency.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    if (recency.size() > rules.k_max) recency.resize(rules.k_max);

    const std::string& speaker = utts[i].speaker;
    auto gold_it = std::find_if(recency.begin(), recency.end(),
                                [&](const auto& r) { return r.second == speaker; });
    bool emit = true;
    if (gold_it == recency.end()) {
      ++stats.gold_not_candidate;
      emit = false;
    } else {
      for (const auto& r : recency) {
        if (spoken[r.second].size() < rules.min_hist) {
          ++stats.short_history;
          emit = false;
          break;
        }
      }
    }

    if (emit) {
      Sample s;
      s.episode_id = utts[i].episode_id;
      const std::size_t block_end = std::min(j, i + rules.n_max);
      for (std::size_t t = i; t < block_end; ++t) {
        s.current.push_back(Truncated(utts[t], rules.max_tokens));
      }
      for (std::size_t r = 0; r < recency.size(); ++r) {
        Candidate c;
        c.name = recency[r].second;
        c.rank = static_cast<int>(r + 1);
        const auto& idx = spoken[c.name];
        const std::size_t take = std::min(rules.max_hist, idx.size());
        for (std::size_t h = idx.size() - take; h < idx.size(); ++h) {
          c.history.push_back(Truncated(utts[idx[h]], rules.max_tokens));
        }
        s.candidates.push_back(std::move(c));
      }
      s.gold = static_cast<std::size_t>(gold_it - recency.begin());
      out.push_back(std::move(s));
      ++stats.emitted;
    }

    for (std::size_t t = i; t < j; ++t) {
      last_pos[utts[t].speaker] = t;
      spoken[utts[t].speaker].push_back(t);
    }
    i = j;
  }
}

}  // namespace

std::vector<Sample> build_samples(std::span<const Utterance> utterances,
                                  const SampleRules& rules, BuildStats* stats) {
  if (rules.k_max == 0 || rules.n_max == 0 || rules.max_tokens == 0 ||
      rules.min_hist > rules.max_hist) {
    throw ContractError("build_samples: invalid rules");
  }
  BuildStats local;
  std::vector<Sample> out;
  std::size_t begin = 0;
  while (begin < utterances.size()) {
    std::size_t end = begin + 1;
    while (end < utterances.size() &&
           utterances[end].episode_id == utterances[begin].episode_id) {
      if (utterances[end].seq_index != kUnknownSeq &&
          utterances[end - 1].seq_index != kUnknownSeq &&
          utterances[end].seq_index <= utterances[end - 1].seq_index) {
        throw ContractError("build_samples: seq_index not increasing in episode " +
                            utterances[begin].episode_id);
      }
      ++end;
    }
    BuildEpisode(utterances.subspan(begin, end - begin), rules, out, local);
    begin = end;
  }
  if (stats != nullptr) *stats += local;
  return out;
}

void validate_sample(const Sample& s, const SampleRules& rules) {
  auto fail = [&](const std::string& what) {
    throw ContractError("invalid sample in episode " + s.episode_id + ": " + what);
  };
  if (s.current.empty() || s.current.size() > rules.n_max) fail("block length");
  if (s.candidates.empty() || s.candidates.size() > rules.k_max) fail("candidate count");
  if (s.gold >= s.candidates.size()) fail("gold index out of range");
  const std::string& speaker = s.current.front().speaker;
  for (const auto& u : s.current) {
    if (u.speaker != speaker) fail("block mixes speakers");
    if (u.tokens.empty()) fail("empty utterance");
  }
  if (s.candidates[s.gold].name != speaker) fail("gold candidate is not the block speaker");
  std::set<std::size_t> block_seq;
  for (const auto& u : s.current) {
    if (u.seq_index != kUnknownSeq) block_seq.insert(u.seq_index);
  }
  std::set<std::string> names;
  for (std::size_t r = 0; r < s.candidates.size(); ++r) {
    const auto& c = s.candidates[r];
    if (c.rank != static_cast<int>(r + 1)) fail("ranks not 1..k in order");
    if (!names.insert(c.name).second) fail("duplicate candidate");
    if (c.history.size() < rules.min_hist || c.history.size() > rules.max_hist) {
      fail("history length for " + c.name);
    }
    for (const auto& h : c.history) {
      if (h.tokens.empty()) fail("empty history utterance");
      if (h.seq_index != kUnknownSeq && block_seq.contains(h.seq_index)) {
        fail("current utterance leaked into history of " + c.name);
      }
    }
  }
}

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kValidation: return "validation";
    case Partition::kTest: return "test";
  }
  return "unknown";
}

std::uint64_t episode_hash(std::string_view episode_id, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_byte = [&](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(seed >> (8 * i)));
  for (char c : episode_id) mix_byte(static_cast<unsigned char>(c));
  // splitmix64 finalizer
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

std::map<std::string, Partition> assign_partitions(
    std::span<const std::string> episode_ids, const SplitRatios& ratios,
    std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.validation <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ContractError("split ratios must be positive and sum to 1");
  }
  std::vector<std::string> ids(episode_ids.begin(), episode_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 3) {
    throw ContractError("cannot split " + std::to_string(ids.size()) +
                        " episode(s) into 3 partitions");
  }
  std::sort(ids.begin(), ids.end(), [seed](const auto& a, const auto& b) {
    const auto ha = episode_hash(a, seed), hb = episode_hash(b, seed);
    return ha != hb ? ha < hb : a < b;
  });
  const auto n = static_cast<long>(ids.size());
  long n_train = std::lround(ratios.train * static_cast<double>(n));
  long n_val = std::lround(ratios.validation * static_cast<double>(n));
  n_train = std::clamp(n_train, 1L, n - 2);
  n_val = std::clamp(n_val, 1L, n - n_train - 1);
  std::map<std::string, Partition> out;
  for (long i = 0; i < n; ++i) {
    const Partition p = i < n_train           ? Partition::kTrain
                        : i < n_train + n_val ? Partition::kValidation
                                              : Partition::kTest;
    out.emplace(ids[static_cast<std::size_t>(i)], p);
  }
  return out;
}

CorpusSplit split_by_episode(std::vector<Sample> samples, const SplitRatios& ratios,
                             std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.episode_id);
  const auto assignment = assign_partitions(ids, ratios, seed);
  CorpusSplit split;
  for (auto& s : samples) {
    switch (assignment.at(s.episode_id)) {
      case Partition::kTrain: split.train.push_back(std::move(s)); break;
      case Partition::kValidation: split.validation.push_back(std::move(s)); break;
      case Partition::kTest: split.test.push_back(std::move(s)); break;
    }
  }
  return split;
}

namespace {

json SentencesJson(const std::vector<Utterance>& utts) {
  json arr = json::array();
  for (const auto& u : utts) arr.push_back(u.tokens);
  return arr;
}

std::vector<Utterance> SentencesFromJson(const json& arr, const std::string& speaker,
                                         const std::string& episode) {
  std::vector<Utterance> out;
  for (const auto& toks : arr) {
    Utterance u;
    u.speaker = speaker;
    u.episode_id = episode;
    u.tokens = toks.get<Tokens>();
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

void write_samples(std::ostream& out, std::span<const Sample> samples) {
  out << json{{"format", "spkcls-samples"}, {"format_version", kSamplesFormatVersion}}.dump()
      << "\n";
  for (const auto& s : samples) {
    json cands = json::array();
    for (const auto& c : s.candidates) {
      cands.push_back({{"name", c.name}, {"rank", c.rank}, {"history", SentencesJson(c.history)}});
    }
    json line = {{"episode_id", s.episode_id},
                 {"current", SentencesJson(s.current)},
                 {"candidates", std::move(cands)},
                 {"gold", s.gold}};
    out << line.dump() << "\n";
  }
}

std::vector<Sample> read_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("samples file is empty");
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != "spkcls-samples") {
      throw FormatError("samples file: missing spkcls-samples header");
    }
    if (header.value("format_version", 0) != kSamplesFormatVersion) {
      throw FormatError("samples file: unsupported format_version");
    }
    std::vector<Sample> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (IsBlank(line)) continue;
      const json j = json::parse(line);
      Sample s;
      s.episode_id = j.at("episode_id").get<std::string>();
      s.gold = j.at("gold").get<std::size_t>();
      for (const auto& c : j.at("candidates")) {
        Candidate cand;
        cand.name = c.at("name").get<std::string>();
        cand.rank = c.at("rank").get<int>();
        cand.history = SentencesFromJson(c.at("history"), cand.name, s.episode_id);
        s.candidates.push_back(std::move(cand));
      }
      if (s.gold >= s.candidates.size()) {
        throw FormatError("samples file line " + std::to_string(line_no) +
                          ": gold index out of range");
      }
      s.current = SentencesFromJson(j.at("current"), s.candidates[s.gold].name, s.episode_id);
      out.push_back(std::move(s));
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("samples file: ") + e.what());
  }
}

void write_stats_json(std::ostream& out, const CorpusStats& stats) {
  json j = {{"format", "spkcls-stats"},
            {"format_version", kStatsFormatVersion},
            {"samples", {{"train", stats.train},
                         {"validation", stats.validation},
                         {"test", stats.test}}},
            {"episodes", stats.episodes},
            {"skipped_lines", stats.skipped_lines},
            {"rules", {{"blocks", stats.build.blocks},
                       {"emitted", stats.build.emitted},
                       {"gold_not_candidate", stats.build.gold_not_candidate},
                       {"short_history", stats.build.short_history}}}};
  out << j.dump(2) << "\n";
}

CorpusStats read_stats_json(std::istream& in) {
  try {
    const json j = json::parse(in);
    if (j.value("format_version", 0) != kStatsFormatVersion) {
      throw FormatError("stats file: unsupported format_version");
    }
    CorpusStats s;
    s.train = j.at("samples").at("train");
    s.validation = j.at("samples").at("validation");
    s.test = j.at("samples").at("test");
    s.episodes = j.at("episodes");
    s.skipped_lines = j.at("skipped_lines");
    s.build.blocks = j.at("rules").at("blocks");
    s.build.emitted = j.at("rules").at("emitted");
    s.build.gold_not_candidate = j.at("rules").at("gold_not_candidate");
    s.build.short_history = j.at("rules").at("short_history");
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("stats file: ") + e.what());
  }
}

void write_stats_table(std::ostream& out, const CorpusStats& stats) {
  auto row = [&](std::string_view name, std::size_t n) {
    std::string cell(name);
    cell.resize(16, ' ');
    std::string count = std::to_string(n);
    out << cell << std::string(count.size() < 12 ? 12 - count.size() : 0, ' ')
        << count << "\n";
  };
  out << "Data partition  # of samples\n";
  row("Train", stats.train);
  row("Validation", stats.validation);
  row("Test", stats.test);
}

}  // namespace spkcls
