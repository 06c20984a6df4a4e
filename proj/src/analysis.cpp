#include "dler/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>

#include "dler/errors.hpp"

namespace dler {

double ClipClassStats::mean_probability() const {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : probability_sum / static_cast<double>(count);
}

double ClipClassStats::mean_entropy() const {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : entropy_sum / static_cast<double>(count);
}

long ClipStats::total() const {
  long n = 0;
  for (const auto& c : classes) n += c.count;
  return n;
}

ClipStats& ClipStats::operator+=(const ClipStats& other) {
  for (std::size_t k = 0; k < classes.size(); ++k) {
    classes[k].count += other.classes[k].count;
    classes[k].probability_sum += other.classes[k].probability_sum;
    classes[k].entropy_sum += other.classes[k].entropy_sum;
  }
  return *this;
}

ClipStats clip_stats(std::span<const Group> batch, const PolicyParams& new_params,
                     const AdvantageSet& advantages, ClipRange clip) {
  advantages.check_aligned(batch);
  ClipStats stats;
  for (std::size_t g = 0; g < batch.size(); ++g) {
    for (std::size_t i = 0; i < batch[g].size(); ++i) {
      const Rollout& ro = batch[g].rollouts[i];
      if (ro.old_logprobs.size() != ro.tokens.size() ||
          ro.old_entropies.size() != ro.tokens.size()) {
        throw AlignmentError("rollout lacks per-token old log-probabilities or entropies");
      }
      const auto new_logp = log_prob(new_params, batch[g].prompt, ro.tokens);
      const auto& adv = advantages.tokens(g, i);
      for (std::size_t t = 0; t < ro.tokens.size(); ++t) {
        const double ratio = std::exp(new_logp[t] - ro.old_logprobs[t]);
        auto& cls = stats[classify_token(ratio, adv[t], clip)];
        ++cls.count;
        cls.probability_sum += std::exp(ro.old_logprobs[t]);
        cls.entropy_sum += ro.old_entropies[t];
      }
    }
  }
  return stats;
}

EntropyHistogram entropy_histogram(std::span<const double> entropies, int bins) {
  if (bins < 1) throw DomainError("histogram needs >= 1 bin");
  if (entropies.empty()) throw EmptyInputError("entropy histogram of an empty sample");
  for (double h : entropies) {
    if (!(h >= 0.0) || !std::isfinite(h)) throw DomainError("entropies must be finite and >= 0");
  }
  EntropyHistogram out;
  out.samples = static_cast<long>(entropies.size());
  out.counts.assign(static_cast<std::size_t>(bins), 0);
  out.max = *std::max_element(entropies.begin(), entropies.end());
  out.bin_width = out.max / bins;
  for (double h : entropies) {
    std::size_t bin = 0;
    if (out.bin_width > 0.0) {
      bin = std::min(static_cast<std::size_t>(h / out.bin_width), static_cast<std::size_t>(bins - 1));
    }
    ++out.counts[bin];
  }

  const double n = static_cast<double>(entropies.size());
  double sum = 0.0;
  for (double h : entropies) sum += h;
  out.mean = sum / n;
  double m2 = 0.0, m3 = 0.0;
  for (double h : entropies) {
    const double d = h - out.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;

  std::vector<double> sorted(entropies.begin(), entropies.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  out.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return out;
}

double TraceTotals::steps_per_response() const {
  return responses == 0 ? 0.0 : static_cast<double>(step_count) / static_cast<double>(responses);
}

double TraceTotals::tokens_per_step() const {
  return step_count == 0 ? 0.0 : static_cast<double>(token_count) / static_cast<double>(step_count);
}

double TraceTotals::keywords_per_response() const {
  return responses == 0 ? 0.0
                        : static_cast<double>(keyword_count) / static_cast<double>(responses);
}

TraceTotals& TraceTotals::operator+=(const TraceTotals& other) {
  responses += other.responses;
  step_count += other.step_count;
  token_count += other.token_count;
  keyword_count += other.keyword_count;
  return *this;
}

const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> keywords = {
      "But",  "Wait",       "Alternatively", "However",    "Hmm",    "Hmmm",
      "Not sure", "Going back", "Backtrack", "Trace back", "Another"};
  return keywords;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

std::vector<std::string_view> split_steps(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t hit = text.find(kStepDelimiter, start);
    const std::size_t end = hit == std::string_view::npos ? text.size() : hit;
    const auto segment = text.substr(start, end - start);
    if (std::any_of(segment.begin(), segment.end(), [](char c) { return !is_space(c); })) {
      out.push_back(segment);
    }
    if (hit == std::string_view::npos) break;
    start = hit + kStepDelimiter.size();
  }
  return out;
}

long count_keywords(std::string_view text, std::span<const std::string> keywords) {
  long count = 0;
  for (const auto& kw : keywords) {
    if (kw.empty()) continue;
    std::size_t pos = text.find(kw);
    while (pos != std::string_view::npos) {
      const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
      const std::size_t after = pos + kw.size();
      const bool right_ok = after >= text.size() || !is_word_char(text[after]);
      if (left_ok && right_ok) ++count;
      pos = text.find(kw, pos + 1);
    }
  }
  return count;
}

long count_words(std::string_view text) {
  long words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

TraceTotals trace_totals(std::string_view text, std::span<const std::string> keywords) {
  TraceTotals t;
  t.responses = 1;
  for (auto step : split_steps(text)) {
    ++t.step_count;
    t.token_count += count_words(step);
  }
  t.keyword_count = count_keywords(text, keywords);
  return t;
}

TraceStats trace_stats(std::span<const TraceRecord> responses,
                       std::span<const std::string> keywords) {
  TraceStats stats;
  for (const auto& rec : responses) {
    const TraceTotals t = trace_totals(rec.text, keywords);
    (rec.correct ? stats.correct : stats.incorrect) += t;
  }
  stats.overall = stats.correct;
  stats.overall += stats.incorrect;
  return stats;
}

std::string render_trace(const Rollout& rollout, const Vocab& vocab) {
  static const char* const kTransitionWords[] = {"Wait", "But", "Alternatively"};
  std::string out;
  auto append_word = [&out](std::string_view w) {
    if (!out.empty() && out.back() != '\n') out += ' ';
    out += w;
  };
  for (TokenId tok : rollout.tokens) {
    const TokenInfo& info = vocab.info(tok);
    switch (info.role) {
      case TokenRole::Filler: append_word("f" + std::to_string(tok)); break;
      case TokenRole::Step: append_word("step"); break;
      case TokenRole::Transition: {
        const auto transitions = vocab.tokens_with_role(TokenRole::Transition);
        const auto idx = static_cast<std::size_t>(
            std::find(transitions.begin(), transitions.end(), tok) - transitions.begin());
        append_word(kTransitionWords[idx % 3]);
        break;
      }
      case TokenRole::Answer: append_word("answer" + std::to_string(info.level)); break;
      case TokenRole::StepDelimiter: out += kStepDelimiter; break;
      case TokenRole::Eos: break;
    }
  }
  return out;
}

namespace {

constexpr int kExactPassAtKLimit = 60;  // C(n, i) * n stays below 2^64

std::uint64_t binomial(int n, int k) {
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
  return static_cast<std::uint64_t>(c);
}

}  // namespace

double pass_at_k(int n, int c, int k) {
  if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
    throw DomainError("pass@k needs 0 <= c <= n and 1 <= k <= n (n=" + std::to_string(n) +
                      ", c=" + std::to_string(c) + ", k=" + std::to_string(k) + ")");
  }
  if (n - c < k) return 1.0;
  if (n <= kExactPassAtKLimit) {
    // exact counts, so small cases agree bit for bit with subset enumeration
    return 1.0 - static_cast<double>(binomial(n - c, k)) / static_cast<double>(binomial(n, k));
  }
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k / i)
  double miss = 1.0;
  for (int i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / i;
  return 1.0 - miss;
}

}  // namespace dler
