#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dler/policy.hpp"
#include "dler/types.hpp"

namespace dler {

struct RewardRecord {
  int correctness = 0;  // R_i in {0, 1}
  bool penalty_applied = false;
  double final_reward = 0.0;  // R'_i = R_i + L_i

  bool operator==(const RewardRecord&) const = default;
};

struct PenaltySpec {
  std::string kind = "truncation";
  int target_length = 24;
};

/// A length penalty maps (correctness, rollout, target length) to the final
/// reward and whether the penalty fired.
struct PenaltyOutcome {
  double final_reward = 0.0;
  bool applied = false;
};
using PenaltyRule =
    std::function<PenaltyOutcome(int correctness, const Rollout& rollout, int target_length)>;

class PenaltyRegistry {
 public:
  /// Registry holding only "truncation".
  static PenaltyRegistry with_builtins();

  /// Throws RegistrationError when `name` is already taken.
  void register_penalty(const std::string& name, PenaltyRule rule);

  bool contains(const std::string& name) const { return rules_.contains(name); }
  const PenaltyRule& rule(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PenaltyRule> rules_;
};

/// Shared read-only registry with the builtin penalties.
const PenaltyRegistry& builtin_penalties();

/// Zero reward on truncation, correctness otherwise.
PenaltyOutcome truncation_penalty(int correctness, const Rollout& rollout, int target_length);

/// Scores one rollout. Rollouts longer than the target length violate the
/// sampling contract (truncation happens at sampling time).
RewardRecord score(const Prompt& prompt, const Rollout& rollout, const PenaltySpec& penalty,
                   const Vocab& vocab, const PenaltyRegistry& registry = builtin_penalties());

}  // namespace dler
