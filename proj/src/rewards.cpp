#include "dler/rewards.hpp"

#include "dler/errors.hpp"
#include "dler/tasks.hpp"

namespace dler {

PenaltyOutcome truncation_penalty(int correctness, const Rollout& rollout, int /*target_length*/) {
  if (rollout.truncated) return {0.0, true};
  return {static_cast<double>(correctness), false};
}

PenaltyRegistry PenaltyRegistry::with_builtins() {
  PenaltyRegistry reg;
  reg.register_penalty("truncation", truncation_penalty);
  return reg;
}

void PenaltyRegistry::register_penalty(const std::string& name, PenaltyRule rule) {
  if (name.empty()) throw RegistrationError("penalty name must not be empty");
  if (!rule) throw RegistrationError("penalty '" + name + "' has no scoring rule");
  if (!rules_.emplace(name, std::move(rule)).second) {
    throw RegistrationError("penalty '" + name + "' is already registered");
  }
}

const PenaltyRule& PenaltyRegistry::rule(const std::string& name) const {
  auto it = rules_.find(name);
  if (it == rules_.end()) throw ConfigError("unknown penalty kind '" + name + "'");
  return it->second;
}

std::vector<std::string> PenaltyRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, rule] : rules_) out.push_back(name);
  return out;
}

const PenaltyRegistry& builtin_penalties() {
  static const PenaltyRegistry registry = PenaltyRegistry::with_builtins();
  return registry;
}

RewardRecord score(const Prompt& prompt, const Rollout& rollout, const PenaltySpec& penalty,
                   const Vocab& vocab, const PenaltyRegistry& registry) {
  if (penalty.target_length < 1) throw ConfigError("penalty target_length must be >= 1");
  if (rollout.length() > penalty.target_length) {
    throw ContractViolation("rollout of length " + std::to_string(rollout.length()) +
                            " exceeds target length " + std::to_string(penalty.target_length));
  }
  RewardRecord rec;
  rec.correctness = verify(prompt, rollout, vocab) ? 1 : 0;
  const auto outcome = registry.rule(penalty.kind)(rec.correctness, rollout, penalty.target_length);
  rec.penalty_applied = outcome.applied;
  rec.final_reward = outcome.final_reward;
  return rec;
}

}  // namespace dler
