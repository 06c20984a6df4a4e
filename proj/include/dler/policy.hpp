#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dler/rng.hpp"
#include "dler/types.hpp"

namespace dler {

enum class TokenRole { Filler, Step, Transition, Answer, StepDelimiter, Eos };

struct TokenInfo {
  TokenRole role = TokenRole::Filler;
  int level = 0;  // difficulty level for Answer tokens, 0 otherwise

  bool operator==(const TokenInfo&) const = default;
};

/// Token-id to role map. Exactly one eos token.
class Vocab {
 public:
  explicit Vocab(std::vector<TokenInfo> roles);

  /// 6 fillers, 1 step, 3 transitions, answers for levels 1..4, 1 step
  /// delimiter and eos (16 tokens, in that id order).
  static Vocab standard();

  int size() const noexcept { return static_cast<int>(roles_.size()); }
  const TokenInfo& info(TokenId id) const;
  TokenRole role(TokenId id) const { return info(id).role; }
  TokenId eos() const noexcept { return eos_; }
  std::optional<TokenId> answer_token(int level) const;
  std::vector<TokenId> tokens_with_role(TokenRole role) const;

  bool operator==(const Vocab&) const = default;

 private:
  std::vector<TokenInfo> roles_;
  TokenId eos_ = 0;
};

inline constexpr int kPositionBuckets = 6;

/// Buckets {0}, {1}, {2,3}, {4..7}, {8..15}, {16+}.
constexpr int position_bucket(int pos) noexcept {
  if (pos <= 0) return 0;
  if (pos == 1) return 1;
  if (pos < 4) return 2;
  if (pos < 8) return 3;
  if (pos < 16) return 4;
  return 5;
}

/// Shape of the tabular state space. Difficulty d maps to class
/// (d - 1) / levels_per_class; a state is (class, previous token or BOS,
/// position bucket).
struct PolicyLayout {
  int classes = 4;
  int levels_per_class = 1;

  bool operator==(const PolicyLayout&) const = default;
};

class PolicyParams {
 public:
  /// All-zero logits (uniform policy).
  PolicyParams(Vocab vocab, PolicyLayout layout);
  PolicyParams(Vocab vocab, PolicyLayout layout, std::vector<double> logits);

  const Vocab& vocab() const noexcept { return vocab_; }
  const PolicyLayout& layout() const noexcept { return layout_; }
  int vocab_size() const noexcept { return vocab_.size(); }
  int state_count() const noexcept { return state_count_; }

  std::span<const double> logits() const noexcept { return logits_; }
  std::span<double> logits() noexcept { return logits_; }
  std::span<const double> row(int state) const;
  std::span<double> row(int state);

  /// Difficulty class of a prompt; throws InvalidPromptError when the
  /// difficulty has no class in this layout.
  int class_of(const Prompt& prompt) const;

  /// `prev` is -1 at the first position (BOS).
  int state_id(int difficulty_class, TokenId prev, int pos) const;

 private:
  Vocab vocab_;
  PolicyLayout layout_;
  int state_count_ = 0;
  std::vector<double> logits_;
};

/// log-softmax of one logit row.
std::vector<double> log_softmax(std::span<const double> row);

Rollout sample_rollout(const PolicyParams& params, const Prompt& prompt, int max_len, Rng& rng);

/// Per-position log pi(o_t | q, o_<t).
std::vector<double> log_prob(const PolicyParams& params, const Prompt& prompt,
                             std::span<const TokenId> tokens);

/// Shannon entropy (nats) of the next-token distribution at `state`.
double token_entropy(const PolicyParams& params, int state);

}  // namespace dler
