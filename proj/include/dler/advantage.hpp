#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dler/types.hpp"

namespace dler {

enum class AdvantageMode { Grpo, BatchNorm };

inline constexpr double kDefaultEpsStd = 1e-8;

/// Per-token advantages, indexed [group][rollout][token].
class AdvantageSet {
 public:
  AdvantageSet() = default;
  AdvantageSet(AdvantageMode mode, std::vector<std::vector<std::vector<double>>> values)
      : mode_(mode), values_(std::move(values)) {}

  /// Broadcasts one scalar per rollout across that rollout's tokens.
  static AdvantageSet broadcast(AdvantageMode mode, std::span<const Group> batch,
                                const std::vector<std::vector<double>>& per_rollout);

  AdvantageMode mode() const noexcept { return mode_; }
  std::size_t groups() const noexcept { return values_.size(); }
  const std::vector<double>& tokens(std::size_t group, std::size_t rollout) const {
    return values_.at(group).at(rollout);
  }
  double scalar(std::size_t group, std::size_t rollout) const;

  AdvantageSet slice(std::size_t first_group, std::size_t count) const;

  /// Throws AlignmentError unless the shape matches the batch token for token.
  void check_aligned(std::span<const Group> batch) const;

 private:
  AdvantageMode mode_ = AdvantageMode::Grpo;
  std::vector<std::vector<std::vector<double>>> values_;
};

/// Group-normalized advantage: (R_i - mean) / (population std + eps_std).
std::vector<double> grpo_scalars(std::span<const double> rewards, double eps_std = kDefaultEpsStd);

AdvantageSet grpo_advantage(const Group& group, double eps_std = kDefaultEpsStd);
AdvantageSet grpo_advantage(std::span<const Group> batch, double eps_std = kDefaultEpsStd);

/// Group-centered rewards normalized by the batch mean and population std.
AdvantageSet batch_norm_advantage(std::span<const Group> batch, double eps_std = kDefaultEpsStd);

AdvantageSet compute_advantages(AdvantageMode mode, std::span<const Group> batch,
                                double eps_std = kDefaultEpsStd);

/// Mean over groups of the within-group population reward variance.
double reward_variance_probe(std::span<const Group> batch);

double population_mean(std::span<const double> xs);
double population_variance(std::span<const double> xs);
double population_std(std::span<const double> xs);

}  // namespace dler
