#pragma once

#include <cstdint>
#include <vector>

namespace dler {

/// Rewards r_j = theta + e_j with e_j ~ N(0, sigma^2); the group-normalized
/// advantage of member i is A_i = (e_i - mean(e)) / D with D the population
/// standard deviation of the group. Moments are conditional on a fixed e_i.
struct BiasExperiment {
  int group_size = 16;
  double sigma = 1.0;
  std::vector<double> epsilon_values{0.0, 0.5, 1.0};
  long samples = 1'000'000;
  std::uint64_t seed = 2024;
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;

  /// |mean - reference| <= z * standard_error
  bool within(double reference, double z = 3.0) const;
};

struct ConditionalMoments {
  double epsilon = 0.0;
  Estimate numerator;  // E[e_i - mean(e) | e_i]
  Estimate d_squared;  // E[D^2 | e_i]
  Estimate advantage;  // E[A_i | e_i]
  Estimate bias;       // E[A_i | e_i] - e_i
  double analytic_numerator = 0.0;
  double analytic_d_squared = 0.0;
  long skipped_zero_d = 0;
};

struct BiasResult {
  int group_size = 0;
  double sigma = 0.0;
  long samples = 0;
  std::vector<ConditionalMoments> moments;
};

struct AnalyticMoments {
  double numerator = 0.0;  // (1 - 1/N) e
  double d_squared = 0.0;  // alpha + beta e^2
};

/// alpha = (N-1)^2 / N^2 * sigma^2, beta = (N-1) / N^2.
AnalyticMoments analytic_moments(int group_size, double sigma, double epsilon);

/// Monte Carlo estimates of the conditional moments for every epsilon.
/// The noise stream for each epsilon depends only on (seed, epsilon index),
/// so runs at different sigma share random numbers.
BiasResult mc_conditional_moments(const BiasExperiment& experiment);

struct BiasPoint {
  double sigma = 0.0;
  Estimate bias;             // signed E[A_i | e_i] - e_i
  double magnitude = 0.0;    // |bias.mean|
  double ci_low = 0.0;       // magnitude -/+ z * SE
  double ci_high = 0.0;
};

struct BiasCurve {
  double epsilon = 0.0;
  double z = 3.0;
  std::vector<BiasPoint> points;

  /// Each point's interval lies strictly above the previous one's.
  bool strictly_increasing_ci_separated() const;
};

/// Curve at one epsilon index from results computed at ascending sigmas.
BiasCurve curve_from_results(const std::vector<BiasResult>& by_sigma, std::size_t epsilon_index,
                             double z = 3.0);

BiasCurve bias_curve(int group_size, const std::vector<double>& sigmas, double epsilon,
                     long samples, std::uint64_t seed, double z = 3.0);

}  // namespace dler
