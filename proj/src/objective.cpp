#include "dler/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dler/errors.hpp"

namespace dler {

namespace {

void check_compatible(const PolicyParams& a, const PolicyParams& b) {
  if (a.vocab_size() != b.vocab_size() || a.state_count() != b.state_count()) {
    throw AlignmentError("reference policy shape differs from trained policy");
  }
}

std::size_t rollout_count(std::span<const Group> batch) {
  std::size_t n = 0;
  for (const auto& g : batch) n += g.size();
  return n;
}

/// Walks every token of the batch, handing the visitor the state's
/// log-softmax row under `params` and under `ref` (when requested).
template <typename Visit>
void for_each_token(const PolicyParams& params, std::span<const Group> batch,
                    const PolicyParams* ref, Visit&& visit) {
  const double n_rollouts = static_cast<double>(rollout_count(batch));
  for (std::size_t g = 0; g < batch.size(); ++g) {
    const auto& group = batch[g];
    const int cls = params.class_of(group.prompt);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto& ro = group.rollouts[i];
      if (ro.old_logprobs.size() != ro.tokens.size()) {
        throw AlignmentError("rollout is missing old log-probabilities");
      }
      const double weight = 1.0 / (n_rollouts * static_cast<double>(ro.length()));
      TokenId prev = -1;
      for (int t = 0; t < ro.length(); ++t) {
        const TokenId tok = ro.tokens[static_cast<std::size_t>(t)];
        if (tok < 0 || tok >= params.vocab_size()) {
          throw InvalidTokenError("token " + std::to_string(tok) + " outside vocab");
        }
        const int state = params.state_id(cls, prev, t);
        const auto logp = log_softmax(params.row(state));
        std::vector<double> ref_logp;
        if (ref != nullptr) ref_logp = log_softmax(ref->row(state));
        visit(g, i, t, state, tok, weight, logp, ref_logp);
        prev = tok;
      }
    }
  }
}

}  // namespace

ObjectiveTerms surrogate_objective(const PolicyParams& params, std::span<const Group> batch,
                                   const AdvantageSet& advantages, ClipRange clip, double kl_coef,
                                   const PolicyParams& ref_params) {
  advantages.check_aligned(batch);
  check_compatible(params, ref_params);
  ObjectiveTerms terms;
  for_each_token(params, batch, &ref_params,
                 [&](std::size_t g, std::size_t i, int t, int, TokenId tok, double weight,
                     const std::vector<double>& logp, const std::vector<double>& ref_logp) {
                   const auto& ro = batch[g].rollouts[i];
                   const double lp = logp[static_cast<std::size_t>(tok)];
                   const double ratio = std::exp(lp - ro.old_logprobs[static_cast<std::size_t>(t)]);
                   const double adv = advantages.tokens(g, i)[static_cast<std::size_t>(t)];
                   const double clipped = std::clamp(ratio, 1.0 - clip.low, 1.0 + clip.high);
                   terms.surrogate += weight * std::min(ratio * adv, clipped * adv);
                   const double d = lp - ref_logp[static_cast<std::size_t>(tok)];
                   terms.kl_penalty += weight * 0.5 * d * d;
                   ++terms.tokens;
                   switch (classify_token(ratio, adv, clip)) {
                     case ClipClass::ClippedHigh: ++terms.clipped_high; break;
                     case ClipClass::ClippedLow: ++terms.clipped_low; break;
                     case ClipClass::Unclipped: break;
                   }
                 });
  terms.total = terms.surrogate - kl_coef * terms.kl_penalty;
  return terms;
}

std::vector<double> surrogate_gradient(const PolicyParams& params, std::span<const Group> batch,
                                       const AdvantageSet& advantages, ClipRange clip,
                                       double kl_coef, const PolicyParams& ref_params,
                                       ObjectiveTerms* terms) {
  if (clip.low <= 0.0 || clip.high <= 0.0) throw ContractViolation("clip thresholds must be > 0");
  advantages.check_aligned(batch);
  check_compatible(params, ref_params);

  std::vector<double> grad(params.logits().size(), 0.0);
  const auto vocab = static_cast<std::size_t>(params.vocab_size());
  const bool with_kl = kl_coef != 0.0;
  ObjectiveTerms local;

  for_each_token(
      params, batch, with_kl ? &ref_params : nullptr,
      [&](std::size_t g, std::size_t i, int t, int state, TokenId tok, double weight,
          const std::vector<double>& logp, const std::vector<double>& ref_logp) {
        const auto& ro = batch[g].rollouts[i];
        const double lp = logp[static_cast<std::size_t>(tok)];
        const double ratio = std::exp(lp - ro.old_logprobs[static_cast<std::size_t>(t)]);
        const double adv = advantages.tokens(g, i)[static_cast<std::size_t>(t)];
        const ClipClass cls = classify_token(ratio, adv, clip);
        ++local.tokens;
        if (cls == ClipClass::ClippedHigh) ++local.clipped_high;
        if (cls == ClipClass::ClippedLow) ++local.clipped_low;

        // d/dz_j log pi(tok) = [j == tok] - p_j
        double coef = cls == ClipClass::Unclipped ? adv * ratio : 0.0;
        if (with_kl) coef -= kl_coef * (lp - ref_logp[static_cast<std::size_t>(tok)]);
        coef *= weight;
        if (coef == 0.0) return;
        double* row = grad.data() + static_cast<std::size_t>(state) * vocab;
        for (std::size_t j = 0; j < vocab; ++j) row[j] -= coef * std::exp(logp[j]);
        row[static_cast<std::size_t>(tok)] += coef;
      });

  if (terms != nullptr) *terms = local;
  return grad;
}

PolicyParams apply_update(const PolicyParams& params, std::span<const double> grad, double lr) {
  if (grad.size() != params.logits().size()) {
    throw AlignmentError("gradient has " + std::to_string(grad.size()) + " entries, params have " +
                         std::to_string(params.logits().size()));
  }
  if (!(lr > 0.0)) throw ContractViolation("learning rate must be > 0");
  std::vector<double> next(params.logits().begin(), params.logits().end());
  for (std::size_t k = 0; k < next.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw NumericalError("non-finite gradient entry at index " + std::to_string(k));
    }
    next[k] += lr * grad[k];
    if (!std::isfinite(next[k])) {
      throw NumericalError("update produced a non-finite logit at index " + std::to_string(k));
    }
  }
  return PolicyParams(params.vocab(), params.layout(), std::move(next));
}

}  // namespace dler
