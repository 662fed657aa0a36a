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
#ifndef SPKCLS_TESTS_FIXTURES_HPP_
#define SPKCLS_TESTS_FIXTURES_HPP_

// Shared helpers for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spkcls/model.hpp"
#include "spkcls/vocab.hpp"

namespace spkcls::testing {

// Random encoded sample with k candidates and 1..3 sentences everywhere.
inline EncodedSample random_sample(std::mt19937_64& rng, std::size_t vocab, std::size_t k,
                                   std::size_t max_len = 4) {
  std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(vocab) - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> nsent(1, 3);
  auto block = [&] {
    std::vector<SentenceIds> b(nsent(rng));
    for (auto& s : b) {
      s.resize(len(rng));
      for (auto& t : s) t = tok(rng);
    }
    return b;
  };
  EncodedSample s;
  s.episode_id = "ep";
  s.current = block();
  for (std::size_t i = 0; i < k; ++i) s.candidates.push_back({static_cast<int>(i + 1), block()});
  s.gold = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
  return s;
}

struct GradCheck {
  double max_rel_error = 0;
  std::string worst;
  std::size_t checked = 0;
};

// Central differences of the evaluation-mode batch loss against backward().
inline double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
}

inline GradCheck grad_check(SpeakerModel<double>& model,
                            const std::vector<EncodedSample>& batch, double h = 1e-5) {
  auto& params = model.params();
  params.zero_grad();
  {
    Graph<double> g(GraphOptions{.check_finite = true, .training = false});
    Var loss = model.loss(g, std::span<const EncodedSample>(batch));
    g.backward(loss);
  }
  auto eval = [&] {
    Graph<double> g(GraphOptions{.check_finite = true, .training = false});
    return g.scalar(model.loss(g, std::span<const EncodedSample>(batch)));
  };
  GradCheck out;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& param = params[p];
    for (std::size_t i = 0; i < param.value.values.size(); ++i) {
      const double saved = param.value.values[i];
      param.value.values[i] = saved + h;
      const double up = eval();
      param.value.values[i] = saved - h;
      const double down = eval();
      param.value.values[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double err = rel_error(param.grad[i], numeric);
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = param.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

}  // namespace spkcls::testing

#endif  // SPKCLS_TESTS_FIXTURES_HPP_
