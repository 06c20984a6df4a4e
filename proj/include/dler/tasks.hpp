#pragma once

#include <array>
#include <vector>

#include "dler/policy.hpp"
#include "dler/rng.hpp"
#include "dler/types.hpp"

namespace dler {

struct TaskSuiteConfig {
  int difficulty_min = 1;
  int difficulty_max = 4;
  int prompts_per_level = 16;
  double init_verbosity_bias = 2.0;  // initial logit boost on filler tokens
};

void validate(const TaskSuiteConfig& config, const Vocab& vocab);

/// prompts_per_level prompts for every difficulty in the configured range,
/// in a seed-dependent order.
std::vector<Prompt> make_prompt_pool(const TaskSuiteConfig& config, const Vocab& vocab, Rng& rng);

/// True iff the rollout is not truncated, holds at least `difficulty` step
/// tokens before its first answer-role token, and that answer token is the
/// prompt's answer.
bool verify(const Prompt& prompt, const Rollout& rollout, const Vocab& vocab);

/// Shortest rollout that verifies: d steps, the answer, eos.
std::vector<TokenId> minimal_correct_tokens(const Prompt& prompt, const Vocab& vocab);

/// Logit offsets of the untrained "verbose reasoner" the recipes start from.
/// Fillers get the task suite's verbosity bias on top of `filler`.
/// The answer logit grows with the position bucket, so the prior reasons for
/// a while before committing.
struct ReasonerPrior {
  double filler = 0.0;
  double step = 3.0;
  double transition = 0.0;
  double step_delimiter = 0.5;
  std::array<double, kPositionBuckets> right_answer{-4.0, -4.0, -4.0, -2.5, 0.5, 0.5};
  double wrong_answer_offset = -3.0;  // relative to the right answer
  double eos = -4.0;
  double eos_after_answer = 6.0;
};

PolicyParams initial_params(const Vocab& vocab, const PolicyLayout& layout,
                            const TaskSuiteConfig& config, const ReasonerPrior& prior = {});

/// Layout with one class per difficulty in the configured range.
PolicyLayout default_layout(const TaskSuiteConfig& config);

/// Everything a run starts from: standard vocab, prompt pool and the
/// untrained policy. The pool depends only on the seed.
struct TaskSetup {
  Vocab vocab;
  std::vector<Prompt> pool;
  PolicyParams initial;
};

TaskSetup make_task_setup(const TaskSuiteConfig& config, std::uint64_t seed);

}  // namespace dler
