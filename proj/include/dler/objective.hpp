#pragma once

#include <span>
#include <vector>

#include "dler/advantage.hpp"
#include "dler/policy.hpp"
#include "dler/types.hpp"

namespace dler {

/// Importance-ratio clip interval [1 - low, 1 + high].
struct ClipRange {
  double low = 0.2;
  double high = 0.28;
};

/// Which branch of min(s*A, clip(s)*A) a token lands on.
enum class ClipClass { Unclipped, ClippedHigh, ClippedLow };

/// Clipped-high iff s > 1+high and A > 0; clipped-low iff s < 1-low and A < 0.
constexpr ClipClass classify_token(double ratio, double advantage, ClipRange clip) noexcept {
  if (advantage > 0.0 && ratio > 1.0 + clip.high) return ClipClass::ClippedHigh;
  if (advantage < 0.0 && ratio < 1.0 - clip.low) return ClipClass::ClippedLow;
  return ClipClass::Unclipped;
}

struct ObjectiveTerms {
  double surrogate = 0.0;
  double kl_penalty = 0.0;
  double total = 0.0;  // surrogate - kl_coef * kl_penalty
  long tokens = 0;
  long clipped_high = 0;
  long clipped_low = 0;
};

/// Clipped surrogate, averaged per response then over all rollouts in the
/// batch, minus kl_coef times the same average of 0.5 (log pi - log pi_ref)^2.
ObjectiveTerms surrogate_objective(const PolicyParams& params, std::span<const Group> batch,
                                   const AdvantageSet& advantages, ClipRange clip, double kl_coef,
                                   const PolicyParams& ref_params);

/// Exact gradient of surrogate_objective(...).total with respect to every
/// logit, in ascent convention. Tokens on the clipped branch contribute
/// nothing to the surrogate part.
std::vector<double> surrogate_gradient(const PolicyParams& params, std::span<const Group> batch,
                                       const AdvantageSet& advantages, ClipRange clip,
                                       double kl_coef, const PolicyParams& ref_params,
                                       ObjectiveTerms* terms = nullptr);

/// logits + lr * grad.
PolicyParams apply_update(const PolicyParams& params, std::span<const double> grad, double lr);

}  // namespace dler
