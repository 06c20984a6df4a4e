#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "dler/advantage.hpp"
#include "dler/objective.hpp"
#include "dler/policy.hpp"
#include "dler/types.hpp"

namespace dler {

// ---------------------------------------------------------------------------
// Clipped-token statistics

struct ClipClassStats {
  long count = 0;
  double probability_sum = 0.0;
  double entropy_sum = 0.0;

  /// NaN when the class is empty.
  double mean_probability() const;
  double mean_entropy() const;
};

struct ClipStats {
  std::array<ClipClassStats, 3> classes{};  // indexed by ClipClass

  const ClipClassStats& operator[](ClipClass c) const {
    return classes[static_cast<std::size_t>(c)];
  }
  ClipClassStats& operator[](ClipClass c) { return classes[static_cast<std::size_t>(c)]; }
  long total() const;
  ClipStats& operator+=(const ClipStats& other);
};

/// Classifies every token by the branch min(s*A, clip(s)*A) takes under
/// `new_params`. Probability and entropy are the old (sampling-time) values.
ClipStats clip_stats(std::span<const Group> batch, const PolicyParams& new_params,
                     const AdvantageSet& advantages, ClipRange clip);

// ---------------------------------------------------------------------------
// Entropy distribution

struct EntropyHistogram {
  double bin_width = 0.0;  // bins cover [0, max]
  std::vector<long> counts;
  double mean = 0.0;
  double median = 0.0;
  double skewness = 0.0;  // standardized third central moment, 0 when degenerate
  double max = 0.0;
  long samples = 0;

  bool right_skewed() const { return skewness > 0.0 && median < mean; }
};

EntropyHistogram entropy_histogram(std::span<const double> entropies, int bins);

// ---------------------------------------------------------------------------
// Reasoning-trace statistics

struct TraceRecord {
  std::string id;
  std::string text;
  bool correct = false;
};

struct TraceTotals {
  long responses = 0;
  long step_count = 0;
  long token_count = 0;
  long keyword_count = 0;

  double steps_per_response() const;
  double tokens_per_step() const;
  double keywords_per_response() const;
  TraceTotals& operator+=(const TraceTotals& other);
  bool operator==(const TraceTotals&) const = default;
};

struct TraceStats {
  TraceTotals overall;
  TraceTotals correct;
  TraceTotals incorrect;
};

inline constexpr std::string_view kStepDelimiter = "\n\n";

/// Transition keywords counted in reasoning traces.
const std::vector<std::string>& default_keywords();

/// Non-empty segments between literal "\n\n" delimiters.
std::vector<std::string_view> split_steps(std::string_view text);

/// Case-sensitive occurrences of any keyword bounded by non-word characters.
long count_keywords(std::string_view text, std::span<const std::string> keywords);

long count_words(std::string_view text);

TraceTotals trace_totals(std::string_view text, std::span<const std::string> keywords);

TraceStats trace_stats(std::span<const TraceRecord> responses,
                       std::span<const std::string> keywords);

/// Renders a synthetic rollout as text: step delimiters become "\n\n",
/// transition tokens become keywords, eos is dropped.
std::string render_trace(const Rollout& rollout, const Vocab& vocab);

// ---------------------------------------------------------------------------
// pass@k

/// 1 - C(n-c, k) / C(n, k): exact integer counts for n <= 60, a running
/// product beyond.
double pass_at_k(int n, int c, int k);

}  // namespace dler
