#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dler {

using TokenId = int;

/// One verifiable task instance. `answer_token` is the vocab id whose role is
/// answer(difficulty).
struct Prompt {
  std::int64_t id = 0;
  int difficulty = 1;
  TokenId answer_token = 0;
};

/// One sampled response with the per-token quantities recorded under the
/// sampling (old) policy.
struct Rollout {
  std::vector<TokenId> tokens;
  std::vector<double> old_logprobs;
  std::vector<double> old_entropies;
  bool truncated = false;

  int length() const noexcept { return static_cast<int>(tokens.size()); }

  /// Prefix of at most `max_len` tokens. A cut that drops tokens marks the
  /// result truncated, exactly as if it had been sampled with that cutoff.
  Rollout truncated_to(int max_len) const {
    if (length() <= max_len) return *this;
    Rollout out;
    out.tokens.assign(tokens.begin(), tokens.begin() + max_len);
    out.old_logprobs.assign(old_logprobs.begin(), old_logprobs.begin() + max_len);
    out.old_entropies.assign(old_entropies.begin(), old_entropies.begin() + max_len);
    out.truncated = true;
    return out;
  }
};

/// G rollouts for one prompt together with their final rewards.
struct Group {
  Prompt prompt;
  std::vector<Rollout> rollouts;
  std::vector<double> rewards;

  std::size_t size() const noexcept { return rollouts.size(); }
};

using Batch = std::vector<Group>;

}  // namespace dler
