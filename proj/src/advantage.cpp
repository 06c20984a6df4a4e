#include "dler/advantage.hpp"

#include <cmath>
#include <string>

#include "dler/errors.hpp"

namespace dler {

double population_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double population_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double mean = population_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) { return std::sqrt(population_variance(xs)); }

AdvantageSet AdvantageSet::broadcast(AdvantageMode mode, std::span<const Group> batch,
                                     const std::vector<std::vector<double>>& per_rollout) {
  if (per_rollout.size() != batch.size()) {
    throw AlignmentError("advantage scalars cover " + std::to_string(per_rollout.size()) +
                         " groups, batch has " + std::to_string(batch.size()));
  }
  std::vector<std::vector<std::vector<double>>> values(batch.size());
  for (std::size_t g = 0; g < batch.size(); ++g) {
    if (per_rollout[g].size() != batch[g].size()) {
      throw AlignmentError("group " + std::to_string(g) + " scalar count mismatch");
    }
    values[g].resize(batch[g].size());
    for (std::size_t i = 0; i < batch[g].size(); ++i) {
      values[g][i].assign(static_cast<std::size_t>(batch[g].rollouts[i].length()),
                          per_rollout[g][i]);
    }
  }
  return AdvantageSet(mode, std::move(values));
}

double AdvantageSet::scalar(std::size_t group, std::size_t rollout) const {
  const auto& toks = tokens(group, rollout);
  return toks.empty() ? 0.0 : toks.front();
}

AdvantageSet AdvantageSet::slice(std::size_t first_group, std::size_t count) const {
  if (first_group + count > values_.size()) throw AlignmentError("advantage slice out of range");
  return AdvantageSet(mode_, {values_.begin() + static_cast<std::ptrdiff_t>(first_group),
                              values_.begin() + static_cast<std::ptrdiff_t>(first_group + count)});
}

void AdvantageSet::check_aligned(std::span<const Group> batch) const {
  if (values_.size() != batch.size()) {
    throw AlignmentError("advantages cover " + std::to_string(values_.size()) +
                         " groups, batch has " + std::to_string(batch.size()));
  }
  for (std::size_t g = 0; g < batch.size(); ++g) {
    if (values_[g].size() != batch[g].size()) {
      throw AlignmentError("group " + std::to_string(g) + " has " +
                           std::to_string(batch[g].size()) + " rollouts but " +
                           std::to_string(values_[g].size()) + " advantage rows");
    }
    for (std::size_t i = 0; i < batch[g].size(); ++i) {
      if (values_[g][i].size() != static_cast<std::size_t>(batch[g].rollouts[i].length())) {
        throw AlignmentError("group " + std::to_string(g) + " rollout " + std::to_string(i) +
                             " token count mismatch");
      }
    }
  }
}

namespace {

void require_group_shape(const Group& group) {
  if (group.rollouts.size() != group.rewards.size()) {
    throw AlignmentError("group has " + std::to_string(group.rollouts.size()) + " rollouts but " +
                         std::to_string(group.rewards.size()) + " rewards");
  }
  if (group.size() < 2) throw ContractViolation("group size must be >= 2");
}

}  // namespace

std::vector<double> grpo_scalars(std::span<const double> rewards, double eps_std) {
  const double mean = population_mean(rewards);
  const double denom = population_std(rewards) + eps_std;
  std::vector<double> out(rewards.size(), 0.0);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const double centered = rewards[i] - mean;
    // eps_std = 0 on a constant group: 0/0 is defined as zero advantage.
    out[i] = centered == 0.0 ? 0.0 : centered / denom;
  }
  return out;
}

AdvantageSet grpo_advantage(const Group& group, double eps_std) {
  return grpo_advantage(std::span<const Group>(&group, 1), eps_std);
}

AdvantageSet grpo_advantage(std::span<const Group> batch, double eps_std) {
  std::vector<std::vector<double>> scalars;
  scalars.reserve(batch.size());
  for (const auto& group : batch) {
    require_group_shape(group);
    scalars.push_back(grpo_scalars(group.rewards, eps_std));
  }
  return AdvantageSet::broadcast(AdvantageMode::Grpo, batch, scalars);
}

AdvantageSet batch_norm_advantage(std::span<const Group> batch, double eps_std) {
  if (batch.empty()) throw ContractViolation("batch-normalized advantage needs >= 1 group");
  std::vector<std::vector<double>> centered;
  std::vector<double> flat;
  centered.reserve(batch.size());
  for (const auto& group : batch) {
    require_group_shape(group);
    const double mean = population_mean(group.rewards);
    auto& row = centered.emplace_back();
    for (double r : group.rewards) {
      row.push_back(r - mean);
      flat.push_back(r - mean);
    }
  }
  const double batch_mean = population_mean(flat);
  const double denom = population_std(flat) + eps_std;
  for (auto& row : centered) {
    for (double& a : row) {
      const double shifted = a - batch_mean;
      a = shifted == 0.0 ? 0.0 : shifted / denom;
    }
  }
  return AdvantageSet::broadcast(AdvantageMode::BatchNorm, batch, centered);
}

AdvantageSet compute_advantages(AdvantageMode mode, std::span<const Group> batch, double eps_std) {
  return mode == AdvantageMode::Grpo ? grpo_advantage(batch, eps_std)
                                     : batch_norm_advantage(batch, eps_std);
}

double reward_variance_probe(std::span<const Group> batch) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& group : batch) {
    require_group_shape(group);
    total += population_variance(group.rewards);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace dler
