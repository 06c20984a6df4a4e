#pragma once

#include <cmath>
#include <vector>

#include "dler/advantage.hpp"
#include "dler/policy.hpp"
#include "dler/rng.hpp"
#include "dler/types.hpp"

namespace dler::test {

/// filler, step, answer(1), eos
inline Vocab tiny_vocab() {
  return Vocab({{TokenRole::Filler, 0},
                {TokenRole::Step, 0},
                {TokenRole::Answer, 1},
                {TokenRole::Eos, 0}});
}

inline PolicyParams random_params(const Vocab& vocab, PolicyLayout layout, Rng& rng,
                                  double scale = 1.0) {
  PolicyParams p(vocab, layout);
  for (double& v : p.logits()) v = scale * (2.0 * rng.uniform() - 1.0);
  return p;
}

/// Rollout with old log-probabilities and entropies recorded under `params`.
inline Rollout rollout_under(const PolicyParams& params, const Prompt& prompt,
                             std::vector<TokenId> tokens, bool truncated = false) {
  Rollout ro;
  ro.tokens = std::move(tokens);
  ro.old_logprobs = log_prob(params, prompt, ro.tokens);
  const int cls = params.class_of(prompt);
  TokenId prev = -1;
  for (std::size_t t = 0; t < ro.tokens.size(); ++t) {
    ro.old_entropies.push_back(token_entropy(params, params.state_id(cls, prev, static_cast<int>(t))));
    prev = ro.tokens[t];
  }
  ro.truncated = truncated;
  return ro;
}

inline Group group_with_rewards(std::vector<double> rewards) {
  Group g;
  g.prompt = {0, 1, 0};
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    Rollout ro;
    ro.tokens = {0};
    ro.old_logprobs = {0.0};
    ro.old_entropies = {0.0};
    g.rollouts.push_back(ro);
  }
  g.rewards = std::move(rewards);
  return g;
}

}  // namespace dler::test
