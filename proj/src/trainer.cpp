#include "dler/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dler/tasks.hpp"

namespace dler {

void validate(const DifficultyTiers& tiers) {
  if (tiers.thresholds.empty()) throw ConfigError("trainer.tiers.thresholds: must not be empty");
  if (tiers.lengths.size() != tiers.thresholds.size() + 1) {
    throw ConfigError("trainer.tiers: expected " + std::to_string(tiers.thresholds.size() + 1) +
                      " lengths for " + std::to_string(tiers.thresholds.size()) +
                      " thresholds, got " + std::to_string(tiers.lengths.size()));
  }
  for (std::size_t i = 0; i < tiers.thresholds.size(); ++i) {
    const double d = tiers.thresholds[i];
    if (!(d > 0.0 && d < 1.0)) {
      throw ConfigError("trainer.tiers.thresholds: " + std::to_string(d) + " is outside (0, 1)");
    }
    if (i > 0 && !(d > tiers.thresholds[i - 1])) {
      throw ConfigError("trainer.tiers.thresholds: must be strictly ascending");
    }
  }
  for (std::size_t i = 0; i < tiers.lengths.size(); ++i) {
    if (tiers.lengths[i] < 1) throw ConfigError("trainer.tiers.lengths: must be >= 1");
    if (i > 0 && tiers.lengths[i] > tiers.lengths[i - 1]) {
      throw ConfigError(
          "trainer.tiers.lengths: must be non-increasing as the correctness ratio rises");
    }
  }
}

int assign_truncation(double correctness_ratio, const DifficultyTiers& tiers) {
  const auto tier = static_cast<std::size_t>(
      std::upper_bound(tiers.thresholds.begin(), tiers.thresholds.end(), correctness_ratio) -
      tiers.thresholds.begin());
  return tiers.lengths[tier];
}

void validate(const TrainerConfig& c) {
  if (c.batch_size < 1) throw ConfigError("trainer.batch_size: must be >= 1");
  if (c.group_size < 2) throw ConfigError("trainer.group_size: must be >= 2");
  if (!(c.eps_low > 0.0)) throw ConfigError("trainer.eps_low: must be > 0");
  if (c.eps_high < c.eps_low) {
    throw ConfigError("trainer.eps_high: must be >= trainer.eps_low (" + std::to_string(c.eps_high) +
                      " < " + std::to_string(c.eps_low) + ")");
  }
  if (!(c.lr > 0.0)) throw ConfigError("trainer.lr: must be > 0");
  if (c.kl_coef < 0.0) throw ConfigError("trainer.kl_coef: must be >= 0");
  if (c.max_steps < 0) throw ConfigError("trainer.max_steps: must be >= 0");
  if (c.eps_std < 0.0) throw ConfigError("advantage.eps_std: must be >= 0");
  if (c.penalty.target_length < 1) throw ConfigError("trainer.penalty.target_length: must be >= 1");
  if (c.max_resample_rounds < 1) throw ConfigError("trainer.max_resample_rounds: must be >= 1");
  if (c.mini_batches < 1) throw ConfigError("trainer.mini_batches: must be >= 1");
  if (c.mini_batches > c.batch_size) {
    throw ConfigError("trainer.mini_batches: must not exceed trainer.batch_size");
  }
  if (c.checkpoint_every < 0) throw ConfigError("trainer.checkpoint_every: must be >= 0");
  if (c.tiers) validate(*c.tiers);
}

Variant parse_variant(const std::string& name) {
  if (name == "grpo") return Variant::Grpo;
  if (name == "dler") return Variant::Dler;
  if (name == "da_dler") return Variant::DaDler;
  if (name == "custom") return Variant::Custom;
  throw ConfigError("unknown variant '" + name + "' (expected grpo, dler, da_dler or custom)");
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::Grpo: return "grpo";
    case Variant::Dler: return "dler";
    case Variant::DaDler: return "da_dler";
    case Variant::Custom: return "custom";
  }
  return "custom";
}

TrainerConfig apply_variant(TrainerConfig config, Variant variant) {
  switch (variant) {
    case Variant::Grpo:
      config.advantage_mode = AdvantageMode::Grpo;
      config.eps_high = config.eps_low;
      config.dynamic_sampling = false;
      config.tiers.reset();
      break;
    case Variant::Dler:
      config.advantage_mode = AdvantageMode::BatchNorm;
      config.dynamic_sampling = true;
      config.tiers.reset();
      break;
    case Variant::DaDler:
      if (!config.tiers) throw ConfigError("variant da_dler requires trainer.tiers");
      config.advantage_mode = AdvantageMode::BatchNorm;
      config.dynamic_sampling = true;
      break;
    case Variant::Custom: break;
  }
  return config;
}

namespace {

double ratio_of(long num, long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double SamplingStats::zero_reward_group_ratio() const { return ratio_of(all_zero_groups, groups); }
double SamplingStats::all_one_group_ratio() const { return ratio_of(all_positive_groups, groups); }
double SamplingStats::mean_accuracy() const { return ratio_of(correct, rollouts); }
double SamplingStats::mean_length() const { return ratio_of(tokens, rollouts); }
double SamplingStats::mean_entropy() const {
  return tokens == 0 ? 0.0 : entropy_sum / static_cast<double>(tokens);
}

bool has_mixed_rewards(const Group& group) {
  bool any_zero = false, any_positive = false;
  for (double r : group.rewards) {
    if (r > 0.0) {
      any_positive = true;
    } else {
      any_zero = true;
    }
  }
  return any_zero && any_positive;
}

namespace {

struct SampledGroup {
  Group group;
  int truncation_length = 0;
};

SampledGroup sample_group(const PolicyParams& params, const Prompt& prompt,
                          const TrainerConfig& config, Rng rng, const PenaltyRegistry& registry,
                          SamplingStats& stats) {
  const Vocab& vocab = params.vocab();
  const int sample_len = config.tiers ? config.tiers->lengths.front() : config.penalty.target_length;

  SampledGroup out;
  out.group.prompt = prompt;
  out.group.rollouts.reserve(static_cast<std::size_t>(config.group_size));
  long correct = 0;
  for (int i = 0; i < config.group_size; ++i) {
    // one stream per rollout: a rollout is a prefix-stable function of its
    // stream, so changing the cutoff only cuts or extends it
    Rng stream = rng.split(static_cast<std::uint64_t>(i));
    Rollout ro = sample_rollout(params, prompt, sample_len, stream);
    if (verify(prompt, ro, vocab)) ++correct;
    stats.tokens += ro.length();
    for (double h : ro.old_entropies) stats.entropy_sum += h;
    out.group.rollouts.push_back(std::move(ro));
  }
  stats.rollouts += config.group_size;
  stats.correct += correct;

  out.truncation_length = config.penalty.target_length;
  if (config.tiers) {
    const double ratio = static_cast<double>(correct) / config.group_size;
    out.truncation_length = assign_truncation(ratio, *config.tiers);
    for (auto& ro : out.group.rollouts) ro = ro.truncated_to(out.truncation_length);
  }
  const PenaltySpec penalty{config.penalty.kind, out.truncation_length};
  for (const auto& ro : out.group.rollouts) {
    out.group.rewards.push_back(score(prompt, ro, penalty, vocab, registry).final_reward);
  }

  ++stats.groups;
  const bool all_zero = std::all_of(out.group.rewards.begin(), out.group.rewards.end(),
                                    [](double r) { return r <= 0.0; });
  const bool all_positive = std::all_of(out.group.rewards.begin(), out.group.rewards.end(),
                                        [](double r) { return r > 0.0; });
  if (all_zero) ++stats.all_zero_groups;
  if (all_positive) ++stats.all_positive_groups;
  return out;
}

}  // namespace

CollectedBatch collect_batch(const PolicyParams& params, std::span<const Prompt> pool,
                             const TrainerConfig& config, Rng& rng,
                             const PenaltyRegistry& registry) {
  if (pool.empty()) throw ContractViolation("prompt pool is empty");
  CollectedBatch out;
  const auto target = static_cast<std::size_t>(config.batch_size);
  std::uint64_t stream = 0;
  const int rounds = config.dynamic_sampling ? 1 + config.max_resample_rounds : 1;
  for (int round = 0; round < rounds && out.batch.size() < target; ++round) {
    out.resample_rounds_used = round;
    for (std::size_t k = 0; k < target && out.batch.size() < target; ++k) {
      const Prompt& prompt = pool[rng.below(pool.size())];
      auto sampled = sample_group(params, prompt, config, rng.split(stream++), registry, out.stats);
      if (config.dynamic_sampling && !has_mixed_rewards(sampled.group)) continue;
      out.truncation_lengths.push_back(sampled.truncation_length);
      out.batch.push_back(std::move(sampled.group));
    }
  }
  if (out.batch.size() < target) {
    std::string what = "resample budget of " + std::to_string(config.max_resample_rounds) +
                       " rounds exhausted with " + std::to_string(out.batch.size()) + " of " +
                       std::to_string(target) + " groups accepted";
    throw PartialBatchError(std::move(what), std::move(out.batch));
  }
  return out;
}

StepResult train_step(const PolicyParams& params, const PolicyParams& ref_params,
                      std::span<const Prompt> pool, const TrainerConfig& config, int step_index,
                      const PenaltyRegistry& registry) {
  Rng rng = Rng(config.seed).split(static_cast<std::uint64_t>(step_index));
  CollectedBatch collected = collect_batch(params, pool, config, rng, registry);
  const Batch& batch = collected.batch;

  StepResult result{params, {}, {}, std::move(collected.truncation_lengths)};
  MetricsRecord& m = result.metrics;
  m.step = step_index;
  m.mean_response_length = collected.stats.mean_length();
  m.mean_accuracy = collected.stats.mean_accuracy();
  m.mean_token_entropy = collected.stats.mean_entropy();
  m.zero_reward_group_ratio = collected.stats.zero_reward_group_ratio();
  m.all_one_group_ratio = collected.stats.all_one_group_ratio();
  m.resample_rounds_used = collected.resample_rounds_used;

  const AdvantageSet advantages = compute_advantages(config.advantage_mode, batch, config.eps_std);
  const std::size_t n_groups = batch.size();
  const auto chunks = static_cast<std::size_t>(config.mini_batches);
  long tokens = 0, clipped_high = 0, clipped_low = 0;
  std::size_t begin = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = n_groups * (c + 1) / chunks;
    if (end == begin) continue;
    const std::span<const Group> chunk(batch.data() + begin, end - begin);
    const AdvantageSet chunk_adv = advantages.slice(begin, end - begin);
    ObjectiveTerms terms;
    const auto grad = surrogate_gradient(result.params, chunk, chunk_adv, config.clip(),
                                         config.kl_coef, ref_params, &terms);
    result.clip += clip_stats(chunk, result.params, chunk_adv, config.clip());
    tokens += terms.tokens;
    clipped_high += terms.clipped_high;
    clipped_low += terms.clipped_low;
    result.params = apply_update(result.params, grad, config.lr);
    begin = end;
  }
  m.clip_high_token_fraction = ratio_of(clipped_high, tokens);
  m.clip_low_token_fraction = ratio_of(clipped_low, tokens);
  return result;
}

TrainingRun run_training(const TrainerConfig& base_config, Variant variant,
                         std::span<const Prompt> pool, const PolicyParams& initial,
                         const RunHooks& hooks, const PenaltyRegistry& registry) {
  const TrainerConfig config = apply_variant(base_config, variant);
  validate(config);
  TrainingRun run{{}, initial, {}};
  for (int step = 0; step < config.max_steps; ++step) {
    StepResult r = train_step(run.final_params, initial, pool, config, step, registry);
    run.final_params = std::move(r.params);
    run.clip += r.clip;
    run.metrics.push_back(r.metrics);
    if (hooks.on_step) hooks.on_step(r.metrics);
    if (hooks.on_checkpoint && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0 &&
        step + 1 < config.max_steps) {
      hooks.on_checkpoint(step + 1, run.final_params);
    }
  }
  if (hooks.on_checkpoint) hooks.on_checkpoint(config.max_steps, run.final_params);
  return run;
}

Evaluation evaluate_policy(const PolicyParams& params, std::span<const Prompt> pool, int max_len,
                           int samples_per_prompt, std::uint64_t seed) {
  if (samples_per_prompt < 1) throw ContractViolation("samples_per_prompt must be >= 1");
  const Vocab& vocab = params.vocab();
  const Rng root(seed);
  Evaluation out;
  std::map<int, LevelEvaluation> levels;
  long correct = 0, tokens = 0;
  double entropy = 0.0;
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const Rng prompt_root = root.split(p);
    auto& level = levels[pool[p].difficulty];
    level.difficulty = pool[p].difficulty;
    for (int s = 0; s < samples_per_prompt; ++s) {
      Rng rng = prompt_root.split(static_cast<std::uint64_t>(s));
      const Rollout ro = sample_rollout(params, pool[p], max_len, rng);
      const bool ok = verify(pool[p], ro, vocab);
      correct += ok;
      tokens += ro.length();
      for (double h : ro.old_entropies) entropy += h;
      ++level.samples;
      level.accuracy += ok;
      level.mean_length += ro.length();
    }
  }
  out.samples = static_cast<long>(pool.size()) * samples_per_prompt;
  out.accuracy = ratio_of(correct, out.samples);
  out.mean_length = ratio_of(tokens, out.samples);
  out.mean_token_entropy = tokens == 0 ? 0.0 : entropy / static_cast<double>(tokens);
  for (auto& [d, level] : levels) {
    level.accuracy /= static_cast<double>(level.samples);
    level.mean_length /= static_cast<double>(level.samples);
    out.levels.push_back(level);
  }
  return out;
}

}  // namespace dler
