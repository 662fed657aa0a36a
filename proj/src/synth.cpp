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
#include "spkcls/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "spkcls/errors.hpp"

namespace spkcls {

std::string_view synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kTemporal: return "temporal";
    case SynthKind::kContent: return "content";
    case SynthKind::kMixed: return "mixed";
  }
  return "unknown";
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "temporal") return SynthKind::kTemporal;
  if (name == "content") return SynthKind::kContent;
  if (name == "mixed") return SynthKind::kMixed;
  throw ContractError("unknown synthetic corpus kind '" + std::string(name) + "'");
}

SynthConfig default_synth_config(SynthKind kind, int episodes, std::uint64_t seed) {
  SynthConfig c;
  c.kind = kind;
  c.episodes = episodes;
  c.seed = seed;
  switch (kind) {
    case SynthKind::kTemporal: c.keyword_rate = 0.0; break;
    case SynthKind::kContent: c.keyword_rate = 0.6; break;
    case SynthKind::kMixed: c.keyword_rate = 0.25; break;
  }
  return c;
}

std::string persona_name(int persona) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "SPEAKER %02d", persona);
  return buf;
}

namespace {

std::string KeywordToken(int persona, int j) {
  return "p" + std::to_string(persona) + "k" + std::to_string(j);
}

std::string SharedToken(int j) { return "w" + std::to_string(j); }

int Uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

SynthCorpus gen_synthetic(const SynthConfig& config) {
  if (config.episodes <= 0) throw ContractError("gen_synthetic: episodes must be > 0");
  if (config.speakers_per_episode < 2 ||
      config.speakers_per_episode > config.persona_pool ||
      config.keywords_per_persona < 1 || config.shared_vocab < 1 ||
      config.min_tokens < 1 || config.max_tokens < config.min_tokens ||
      config.turns_per_episode < 1 || config.p_repeat < 0 || config.p_repeat > 1 ||
      config.keyword_rate < 0 || config.keyword_rate > 1) {
    throw ContractError("gen_synthetic: inconsistent configuration");
  }
  const bool temporal_law = config.kind != SynthKind::kContent;
  const double keyword_rate =
      config.kind == SynthKind::kTemporal ? 0.0 : config.keyword_rate;

  SynthCorpus corpus;
  for (int p = 0; p < config.persona_pool; ++p) {
    auto& kw = corpus.keywords[persona_name(p)];
    for (int j = 0; j < config.keywords_per_persona; ++j) kw.push_back(KeywordToken(p, j));
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> pool(static_cast<std::size_t>(config.persona_pool));
  for (int p = 0; p < config.persona_pool; ++p) pool[static_cast<std::size_t>(p)] = p;

  for (int e = 0; e < config.episodes; ++e) {
    char id[64];
    std::snprintf(id, sizeof(id), "synth-%s-%05d",
                  std::string(synth_kind_name(config.kind)).c_str(), e);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<int> cast(pool.begin(), pool.begin() + config.speakers_per_episode);

    std::vector<int> turns;  // index into cast
    std::size_t seq = 0;
    for (int t = 0; t < config.turns_per_episode; ++t) {
      int next = 0;
      if (turns.empty()) {
        next = Uniform(rng, 0, config.speakers_per_episode - 1);
      } else {
        const int current = turns.back();
        int recent_other = -1;
        for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
          if (*it != current) {
            recent_other = *it;
            break;
          }
        }
        std::vector<int> others;
        for (int s = 0; s < config.speakers_per_episode; ++s) {
          if (s != current) others.push_back(s);
        }
        if (temporal_law && recent_other >= 0) {
          if (unit(rng) < config.p_repeat || others.size() == 1) {
            next = recent_other;
          } else {
            std::erase(others, recent_other);
            next = others[static_cast<std::size_t>(
                Uniform(rng, 0, static_cast<int>(others.size()) - 1))];
          }
        } else {
          next = others[static_cast<std::size_t>(
              Uniform(rng, 0, static_cast<int>(others.size()) - 1))];
        }
      }
      turns.push_back(next);

      const double r = unit(rng);
      const int block_len = r < 0.6 ? 1 : (r < 0.9 ? 2 : 3);
      const int persona = cast[static_cast<std::size_t>(next)];
      for (int b = 0; b < block_len; ++b) {
        Utterance u;
        u.speaker = persona_name(persona);
        u.episode_id = id;
        u.seq_index = seq++;
        const int len = Uniform(rng, config.min_tokens, config.max_tokens);
        const int n_kw = static_cast<int>(std::ceil(keyword_rate * len - 1e-12));
        for (int i = 0; i < len; ++i) {
          if (i < n_kw) {
            u.tokens.push_back(
                KeywordToken(persona, Uniform(rng, 0, config.keywords_per_persona - 1)));
          } else {
            u.tokens.push_back(SharedToken(Uniform(rng, 0, config.shared_vocab - 1)));
          }
        }
        std::shuffle(u.tokens.begin(), u.tokens.end(), rng);
        corpus.utterances.push_back(std::move(u));
      }
    }
  }
  return corpus;
}

std::string to_transcript(const std::vector<Utterance>& episode) {
  std::string out;
  for (const auto& u : episode) {
    out += u.speaker;
    out += ":";
    for (const auto& t : u.tokens) {
      out += ' ';
      out += t;
    }
    out += '\n';
  }
  return out;
}

}  // namespace spkcls
