#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dler/advantage.hpp"
#include "dler/analysis.hpp"
#include "dler/errors.hpp"
#include "dler/objective.hpp"
#include "dler/policy.hpp"
#include "dler/rewards.hpp"
#include "dler/types.hpp"

namespace dler {

/// Correctness-ratio tiers for difficulty-aware truncation. A ratio r falls
/// in tier i when thresholds[i-1] <= r < thresholds[i]; tier i uses
/// lengths[i].
struct DifficultyTiers {
  std::vector<double> thresholds;
  std::vector<int> lengths;
};

void validate(const DifficultyTiers& tiers);

/// Truncation length for a prompt with the given correctness ratio. A ratio
/// equal to a threshold belongs to the easier (shorter) tier.
int assign_truncation(double correctness_ratio, const DifficultyTiers& tiers);

struct TrainerConfig {
  int batch_size = 64;
  int group_size = 8;
  double eps_low = 0.2;
  double eps_high = 0.28;
  double lr = 2.0;
  double kl_coef = 0.0005;
  int max_steps = 60;
  AdvantageMode advantage_mode = AdvantageMode::BatchNorm;
  double eps_std = kDefaultEpsStd;
  PenaltySpec penalty{"truncation", 24};
  bool dynamic_sampling = true;
  std::optional<DifficultyTiers> tiers;
  int max_resample_rounds = 10;
  std::uint64_t seed = 7;
  /// Sequential policy updates per batch (one pass over the data).
  int mini_batches = 16;
  /// 0 keeps only the final checkpoint.
  int checkpoint_every = 0;

  ClipRange clip() const { return {eps_low, eps_high}; }
};

void validate(const TrainerConfig& config);

enum class Variant { Grpo, Dler, DaDler, Custom };

Variant parse_variant(const std::string& name);
std::string to_string(Variant variant);

/// Switches the recipe ingredients for a named variant. grpo: group
/// normalization, symmetric clip at eps_low, no filtering, fixed truncation.
/// dler: batch normalization, decoupled clip, dynamic sampling. da_dler: dler
/// plus difficulty tiers (which must be set). custom: unchanged.
TrainerConfig apply_variant(TrainerConfig config, Variant variant);

struct MetricsRecord {
  int step = 0;
  double mean_response_length = 0.0;
  double mean_accuracy = 0.0;
  double mean_token_entropy = 0.0;
  double zero_reward_group_ratio = 0.0;
  double all_one_group_ratio = 0.0;
  double clip_high_token_fraction = 0.0;
  double clip_low_token_fraction = 0.0;
  int resample_rounds_used = 0;

  bool operator==(const MetricsRecord&) const = default;
};

/// Statistics over every group sampled while filling a batch, before any
/// filtering.
struct SamplingStats {
  long groups = 0;
  long all_zero_groups = 0;
  long all_positive_groups = 0;
  long rollouts = 0;
  long correct = 0;
  long tokens = 0;
  double entropy_sum = 0.0;

  double zero_reward_group_ratio() const;
  double all_one_group_ratio() const;
  double mean_accuracy() const;
  double mean_length() const;
  double mean_entropy() const;
};

struct CollectedBatch {
  Batch batch;
  SamplingStats stats;
  int resample_rounds_used = 0;
  std::vector<int> truncation_lengths;  // one per accepted group
};

class PartialBatchError : public Error {
 public:
  PartialBatchError(const std::string& what, Batch accepted)
      : Error(what), accepted_(std::move(accepted)) {}
  const Batch& accepted() const noexcept { return accepted_; }

 private:
  Batch accepted_;
};

bool has_mixed_rewards(const Group& group);

/// Samples groups of G rollouts per drawn prompt and scores them. With
/// dynamic sampling, groups whose rewards are all zero or all positive are
/// discarded and fresh prompts drawn until B groups are accepted or the
/// resample budget runs out (PartialBatchError).
CollectedBatch collect_batch(const PolicyParams& params, std::span<const Prompt> pool,
                             const TrainerConfig& config, Rng& rng,
                             const PenaltyRegistry& registry = builtin_penalties());

struct StepResult {
  PolicyParams params;
  MetricsRecord metrics;
  ClipStats clip;
  std::vector<int> truncation_lengths;
};

/// collect_batch, advantages over the whole batch, then one ascent step per
/// mini-batch. Metrics describe the pre-update batch.
StepResult train_step(const PolicyParams& params, const PolicyParams& ref_params,
                      std::span<const Prompt> pool, const TrainerConfig& config, int step_index,
                      const PenaltyRegistry& registry = builtin_penalties());

struct RunHooks {
  std::function<void(const MetricsRecord&)> on_step;
  std::function<void(int step, const PolicyParams&)> on_checkpoint;
};

struct TrainingRun {
  std::vector<MetricsRecord> metrics;
  PolicyParams final_params;
  ClipStats clip;
};

/// max_steps sequential train_steps from `initial` (also the KL reference).
/// Hooks see every metrics record before a failing step rethrows.
TrainingRun run_training(const TrainerConfig& config, Variant variant,
                         std::span<const Prompt> pool, const PolicyParams& initial,
                         const RunHooks& hooks = {},
                         const PenaltyRegistry& registry = builtin_penalties());

struct LevelEvaluation {
  int difficulty = 0;
  long samples = 0;
  double accuracy = 0.0;
  double mean_length = 0.0;
};

struct Evaluation {
  long samples = 0;
  double accuracy = 0.0;
  double mean_length = 0.0;
  double mean_token_entropy = 0.0;
  std::vector<LevelEvaluation> levels;
};

/// Samples `samples_per_prompt` rollouts for every prompt at `max_len`.
Evaluation evaluate_policy(const PolicyParams& params, std::span<const Prompt> pool, int max_len,
                           int samples_per_prompt, std::uint64_t seed);

}  // namespace dler
