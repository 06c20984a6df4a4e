#include "dler/bias_oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dler/errors.hpp"
#include "dler/rng.hpp"

namespace dler {

namespace {

/// Welford running mean/variance.
class Accumulator {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  Estimate estimate() const {
    if (n_ == 0) return {0.0, std::numeric_limits<double>::infinity()};
    if (n_ == 1) return {mean_, std::numeric_limits<double>::infinity()};
    const double var = m2_ / static_cast<double>(n_ - 1);
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

void check_domain(int group_size, double sigma) {
  if (group_size < 2) {
    throw DomainError("group size N must be >= 2, got " + std::to_string(group_size));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be > 0");
}

}  // namespace

bool Estimate::within(double reference, double z) const {
  return std::abs(mean - reference) <= z * standard_error;
}

AnalyticMoments analytic_moments(int group_size, double sigma, double epsilon) {
  check_domain(group_size, sigma);
  const double n = group_size;
  const double alpha = (n - 1.0) * (n - 1.0) / (n * n) * sigma * sigma;
  const double beta = (n - 1.0) / (n * n);
  return {(1.0 - 1.0 / n) * epsilon, alpha + beta * epsilon * epsilon};
}

BiasResult mc_conditional_moments(const BiasExperiment& exp) {
  check_domain(exp.group_size, exp.sigma);
  if (exp.samples < 1) throw DomainError("samples must be >= 1");

  BiasResult result{exp.group_size, exp.sigma, exp.samples, {}};
  const Rng root(exp.seed);
  const auto n = static_cast<std::size_t>(exp.group_size);
  std::vector<double> noise(n);

  for (std::size_t e = 0; e < exp.epsilon_values.size(); ++e) {
    const double eps = exp.epsilon_values[e];
    Rng rng = root.split(e);
    Accumulator numerator, d_squared, advantage, bias;
    ConditionalMoments cm;
    cm.epsilon = eps;
    for (long s = 0; s < exp.samples; ++s) {
      noise[0] = eps;
      double sum = eps;
      for (std::size_t j = 1; j < n; ++j) {
        noise[j] = exp.sigma * rng.normal();
        sum += noise[j];
      }
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (double x : noise) ss += (x - mean) * (x - mean);
      const double d2 = ss / static_cast<double>(n);
      const double centered = eps - mean;
      numerator.add(centered);
      d_squared.add(d2);
      if (d2 <= 0.0) {
        ++cm.skipped_zero_d;
        continue;
      }
      const double a = centered / std::sqrt(d2);
      advantage.add(a);
      bias.add(a - eps);
    }
    cm.numerator = numerator.estimate();
    cm.d_squared = d_squared.estimate();
    cm.advantage = advantage.estimate();
    cm.bias = bias.estimate();
    const auto analytic = analytic_moments(exp.group_size, exp.sigma, eps);
    cm.analytic_numerator = analytic.numerator;
    cm.analytic_d_squared = analytic.d_squared;
    result.moments.push_back(cm);
  }
  return result;
}

bool BiasCurve::strictly_increasing_ci_separated() const {
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (!(points[k].ci_low > points[k - 1].ci_high)) return false;
  }
  return true;
}

BiasCurve curve_from_results(const std::vector<BiasResult>& by_sigma, std::size_t epsilon_index,
                             double z) {
  BiasCurve curve;
  curve.z = z;
  for (const auto& res : by_sigma) {
    const ConditionalMoments& cm = res.moments.at(epsilon_index);
    curve.epsilon = cm.epsilon;
    BiasPoint p;
    p.sigma = res.sigma;
    p.bias = cm.bias;
    p.magnitude = std::abs(p.bias.mean);
    p.ci_low = p.magnitude - z * p.bias.standard_error;
    p.ci_high = p.magnitude + z * p.bias.standard_error;
    curve.points.push_back(p);
  }
  return curve;
}

BiasCurve bias_curve(int group_size, const std::vector<double>& sigmas, double epsilon,
                     long samples, std::uint64_t seed, double z) {
  if (sigmas.empty()) throw DomainError("sigma list must not be empty");
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    check_domain(group_size, sigmas[k]);
    if (k > 0 && !(sigmas[k] > sigmas[k - 1])) {
      throw DomainError("sigma list must be strictly ascending");
    }
  }
  std::vector<BiasResult> results;
  for (double sigma : sigmas) {
    results.push_back(mc_conditional_moments({group_size, sigma, {epsilon}, samples, seed}));
  }
  auto curve = curve_from_results(results, 0, z);
  curve.epsilon = epsilon;
  return curve;
}

}  // namespace dler
