#include "dler/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dler/errors.hpp"

namespace dler {

Vocab::Vocab(std::vector<TokenInfo> roles) : roles_(std::move(roles)) {
  if (roles_.empty()) throw ConfigError("vocab must not be empty");
  int eos_count = 0;
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    if (roles_[i].role == TokenRole::Eos) {
      ++eos_count;
      eos_ = static_cast<TokenId>(i);
    }
    if (roles_[i].role == TokenRole::Answer && roles_[i].level < 1) {
      throw ConfigError("answer token " + std::to_string(i) + " needs a level >= 1");
    }
  }
  if (eos_count != 1) {
    throw ConfigError("vocab needs exactly one eos token, found " + std::to_string(eos_count));
  }
}

Vocab Vocab::standard() {
  std::vector<TokenInfo> roles;
  for (int i = 0; i < 6; ++i) roles.push_back({TokenRole::Filler, 0});
  roles.push_back({TokenRole::Step, 0});
  for (int i = 0; i < 3; ++i) roles.push_back({TokenRole::Transition, 0});
  for (int level = 1; level <= 4; ++level) roles.push_back({TokenRole::Answer, level});
  roles.push_back({TokenRole::StepDelimiter, 0});
  roles.push_back({TokenRole::Eos, 0});
  return Vocab(std::move(roles));
}

const TokenInfo& Vocab::info(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw InvalidTokenError("token id " + std::to_string(id) + " outside vocab of size " +
                            std::to_string(size()));
  }
  return roles_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocab::answer_token(int level) const {
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    if (roles_[i].role == TokenRole::Answer && roles_[i].level == level) {
      return static_cast<TokenId>(i);
    }
  }
  return std::nullopt;
}

std::vector<TokenId> Vocab::tokens_with_role(TokenRole role) const {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    if (roles_[i].role == role) out.push_back(static_cast<TokenId>(i));
  }
  return out;
}

namespace {

int count_states(const Vocab& vocab, const PolicyLayout& layout) {
  if (layout.classes < 1 || layout.levels_per_class < 1) {
    throw ConfigError("policy layout needs classes >= 1 and levels_per_class >= 1");
  }
  return layout.classes * (vocab.size() + 1) * kPositionBuckets;
}

}  // namespace

PolicyParams::PolicyParams(Vocab vocab, PolicyLayout layout)
    : vocab_(std::move(vocab)), layout_(layout), state_count_(count_states(vocab_, layout_)) {
  logits_.assign(static_cast<std::size_t>(state_count_) * vocab_.size(), 0.0);
}

PolicyParams::PolicyParams(Vocab vocab, PolicyLayout layout, std::vector<double> logits)
    : vocab_(std::move(vocab)),
      layout_(layout),
      state_count_(count_states(vocab_, layout_)),
      logits_(std::move(logits)) {
  if (logits_.size() != static_cast<std::size_t>(state_count_) * vocab_.size()) {
    throw AlignmentError("logit tensor has " + std::to_string(logits_.size()) +
                         " entries, layout needs " +
                         std::to_string(static_cast<std::size_t>(state_count_) * vocab_.size()));
  }
  for (double v : logits_) {
    if (!std::isfinite(v)) throw NumericalError("non-finite logit");
  }
}

std::span<const double> PolicyParams::row(int state) const {
  if (state < 0 || state >= state_count_) {
    throw InvalidStateError("state id " + std::to_string(state) + " out of range");
  }
  const auto v = static_cast<std::size_t>(vocab_.size());
  return std::span<const double>(logits_).subspan(static_cast<std::size_t>(state) * v, v);
}

std::span<double> PolicyParams::row(int state) {
  if (state < 0 || state >= state_count_) {
    throw InvalidStateError("state id " + std::to_string(state) + " out of range");
  }
  const auto v = static_cast<std::size_t>(vocab_.size());
  return std::span<double>(logits_).subspan(static_cast<std::size_t>(state) * v, v);
}

int PolicyParams::class_of(const Prompt& prompt) const {
  if (prompt.difficulty < 1) {
    throw InvalidPromptError("prompt " + std::to_string(prompt.id) + " has difficulty " +
                             std::to_string(prompt.difficulty));
  }
  const int cls = (prompt.difficulty - 1) / layout_.levels_per_class;
  if (cls >= layout_.classes) {
    throw InvalidPromptError("prompt " + std::to_string(prompt.id) + " difficulty " +
                             std::to_string(prompt.difficulty) + " has no policy class");
  }
  return cls;
}

int PolicyParams::state_id(int difficulty_class, TokenId prev, int pos) const {
  const int prev_slot = prev < 0 ? vocab_.size() : prev;
  return (difficulty_class * (vocab_.size() + 1) + prev_slot) * kPositionBuckets +
         position_bucket(pos);
}

std::vector<double> log_softmax(std::span<const double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - peak);
  const double log_norm = peak + std::log(sum);
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] - log_norm;
  return out;
}

namespace {

double entropy_of(std::span<const double> logp) {
  double h = 0.0;
  for (double lp : logp) {
    if (lp > -745.0) h -= std::exp(lp) * lp;
  }
  return std::max(h, 0.0);
}

}  // namespace

Rollout sample_rollout(const PolicyParams& params, const Prompt& prompt, int max_len, Rng& rng) {
  if (max_len < 1) throw ContractViolation("max_len must be >= 1");
  const int cls = params.class_of(prompt);
  const TokenId eos = params.vocab().eos();

  Rollout out;
  out.tokens.reserve(static_cast<std::size_t>(max_len));
  out.old_logprobs.reserve(static_cast<std::size_t>(max_len));
  out.old_entropies.reserve(static_cast<std::size_t>(max_len));

  TokenId prev = -1;
  for (int pos = 0; pos < max_len; ++pos) {
    const auto logp = log_softmax(params.row(params.state_id(cls, prev, pos)));
    const double u = rng.uniform();
    double cdf = 0.0;
    TokenId pick = static_cast<TokenId>(logp.size()) - 1;
    for (std::size_t k = 0; k < logp.size(); ++k) {
      cdf += std::exp(logp[k]);
      if (u < cdf) {
        pick = static_cast<TokenId>(k);
        break;
      }
    }
    out.tokens.push_back(pick);
    out.old_logprobs.push_back(logp[static_cast<std::size_t>(pick)]);
    out.old_entropies.push_back(entropy_of(logp));
    if (pick == eos) {
      out.truncated = false;
      return out;
    }
    prev = pick;
  }
  out.truncated = true;
  return out;
}

std::vector<double> log_prob(const PolicyParams& params, const Prompt& prompt,
                             std::span<const TokenId> tokens) {
  const int cls = params.class_of(prompt);
  std::vector<double> out;
  out.reserve(tokens.size());
  TokenId prev = -1;
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const TokenId tok = tokens[pos];
    if (tok < 0 || tok >= params.vocab_size()) {
      throw InvalidTokenError("token " + std::to_string(tok) + " at position " +
                              std::to_string(pos) + " outside vocab");
    }
    const auto logp = log_softmax(params.row(params.state_id(cls, prev, static_cast<int>(pos))));
    out.push_back(logp[static_cast<std::size_t>(tok)]);
    prev = tok;
  }
  return out;
}

double token_entropy(const PolicyParams& params, int state) {
  return entropy_of(log_softmax(params.row(state)));
}

}  // namespace dler
