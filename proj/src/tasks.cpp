#include "dler/tasks.hpp"

#include <string>
#include <utility>

#include "dler/errors.hpp"

namespace dler {

void validate(const TaskSuiteConfig& config, const Vocab& vocab) {
  if (config.difficulty_min < 1) throw ConfigError("tasks.difficulty_range: minimum must be >= 1");
  if (config.difficulty_max < config.difficulty_min) {
    throw ConfigError("tasks.difficulty_range: empty range [" +
                      std::to_string(config.difficulty_min) + ", " +
                      std::to_string(config.difficulty_max) + "]");
  }
  if (config.prompts_per_level < 1) throw ConfigError("tasks.prompts_per_level: must be >= 1");
  if (config.init_verbosity_bias < 0.0) {
    throw ConfigError("tasks.init_verbosity_bias: must be >= 0");
  }
  for (int d = config.difficulty_min; d <= config.difficulty_max; ++d) {
    if (!vocab.answer_token(d)) {
      throw ConfigError("tasks.difficulty_range: vocab has no answer token for level " +
                        std::to_string(d));
    }
  }
}

std::vector<Prompt> make_prompt_pool(const TaskSuiteConfig& config, const Vocab& vocab, Rng& rng) {
  validate(config, vocab);
  std::vector<Prompt> pool;
  std::int64_t next_id = 0;
  for (int d = config.difficulty_min; d <= config.difficulty_max; ++d) {
    const TokenId answer = *vocab.answer_token(d);
    for (int k = 0; k < config.prompts_per_level; ++k) pool.push_back({next_id++, d, answer});
  }
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[rng.below(i)]);
  }
  return pool;
}

bool verify(const Prompt& prompt, const Rollout& rollout, const Vocab& vocab) {
  if (rollout.truncated) return false;
  int steps = 0;
  for (TokenId tok : rollout.tokens) {
    if (tok < 0 || tok >= vocab.size()) return false;
    const TokenRole role = vocab.role(tok);
    if (role == TokenRole::Step) ++steps;
    if (role == TokenRole::Answer) return steps >= prompt.difficulty && tok == prompt.answer_token;
  }
  return false;
}

std::vector<TokenId> minimal_correct_tokens(const Prompt& prompt, const Vocab& vocab) {
  const auto steps = vocab.tokens_with_role(TokenRole::Step);
  if (steps.empty()) throw ConfigError("vocab has no step token");
  std::vector<TokenId> out(static_cast<std::size_t>(prompt.difficulty), steps.front());
  out.push_back(prompt.answer_token);
  out.push_back(vocab.eos());
  return out;
}

PolicyLayout default_layout(const TaskSuiteConfig& config) {
  return PolicyLayout{config.difficulty_max, 1};
}

PolicyParams initial_params(const Vocab& vocab, const PolicyLayout& layout,
                            const TaskSuiteConfig& config, const ReasonerPrior& prior) {
  PolicyParams params(vocab, layout);
  const int v = vocab.size();
  for (int cls = 0; cls < layout.classes; ++cls) {
    const int level_lo = cls * layout.levels_per_class + 1;
    const int level_hi = level_lo + layout.levels_per_class - 1;
    for (int prev = -1; prev < v; ++prev) {
      const bool after_answer = prev >= 0 && vocab.role(prev) == TokenRole::Answer;
      for (int bucket_pos : {0, 1, 2, 4, 8, 16}) {
        const double right = prior.right_answer[static_cast<std::size_t>(position_bucket(bucket_pos))];
        auto row = params.row(params.state_id(cls, prev, bucket_pos));
        for (TokenId tok = 0; tok < v; ++tok) {
          const TokenInfo& info = vocab.info(tok);
          double logit = 0.0;
          switch (info.role) {
            case TokenRole::Filler: logit = prior.filler + config.init_verbosity_bias; break;
            case TokenRole::Step: logit = prior.step; break;
            case TokenRole::Transition: logit = prior.transition; break;
            case TokenRole::StepDelimiter: logit = prior.step_delimiter; break;
            case TokenRole::Answer:
              logit = info.level >= level_lo && info.level <= level_hi
                          ? right
                          : right + prior.wrong_answer_offset;
              break;
            case TokenRole::Eos: logit = after_answer ? prior.eos_after_answer : prior.eos; break;
          }
          row[static_cast<std::size_t>(tok)] = logit;
        }
      }
    }
  }
  return params;
}

TaskSetup make_task_setup(const TaskSuiteConfig& config, std::uint64_t seed) {
  Vocab vocab = Vocab::standard();
  // stream ids below 2^63 are used for training steps
  Rng rng = Rng(seed).split(~std::uint64_t{0});
  auto pool = make_prompt_pool(config, vocab, rng);
  auto initial = initial_params(vocab, default_layout(config), config);
  return {std::move(vocab), std::move(pool), std::move(initial)};
}

}  // namespace dler
