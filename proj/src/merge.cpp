#include "dler/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dler/errors.hpp"

namespace dler {

namespace {

void check_snapshot(const ParamSnapshot& s, const char* which) {
  if (s.values.size() != static_cast<std::size_t>(s.state_count) * s.vocab_size) {
    throw IncompatibleSnapshotError(std::string(which) + " snapshot length does not match its shape");
  }
  for (double v : s.values) {
    if (!std::isfinite(v)) throw NumericalError(std::string(which) + " snapshot has a non-finite entry");
  }
}

void check_compatible(const ParamSnapshot& base, const ParamSnapshot& tuned) {
  check_snapshot(base, "base");
  check_snapshot(tuned, "tuned");
  if (base.version != tuned.version) {
    throw IncompatibleSnapshotError("format versions differ: " + std::to_string(base.version) +
                                    " vs " + std::to_string(tuned.version));
  }
  if (base.state_count != tuned.state_count || base.vocab_size != tuned.vocab_size) {
    throw IncompatibleSnapshotError(
        "shapes differ: " + std::to_string(base.state_count) + "x" +
        std::to_string(base.vocab_size) + " vs " + std::to_string(tuned.state_count) + "x" +
        std::to_string(tuned.vocab_size));
  }
}

}  // namespace

std::vector<std::size_t> top_delta_indices(const std::vector<double>& abs_delta,
                                           double top_fraction) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw DomainError("top_fraction must lie in (0, 1]");
  }
  const std::size_t n = abs_delta.size();
  const auto keep = std::min(
      n, static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger = [&](std::size_t a, std::size_t b) {
    if (abs_delta[a] != abs_delta[b]) return abs_delta[a] > abs_delta[b];
    return a < b;
  };
  if (keep < n) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                     larger);
  }
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

ParamSnapshot select_merge(const ParamSnapshot& base, const ParamSnapshot& tuned,
                           double top_fraction, double scale) {
  check_compatible(base, tuned);
  if (!std::isfinite(scale)) throw DomainError("merge scale must be finite");
  std::vector<double> abs_delta(base.values.size());
  for (std::size_t k = 0; k < abs_delta.size(); ++k) {
    abs_delta[k] = std::abs(tuned.values[k] - base.values[k]);
  }
  ParamSnapshot merged = base;
  for (std::size_t k : top_delta_indices(abs_delta, top_fraction)) {
    // scale 1 reproduces the tuned value exactly rather than base + (tuned - base)
    merged.values[k] = scale == 1.0 ? tuned.values[k]
                                    : base.values[k] + scale * (tuned.values[k] - base.values[k]);
  }
  return merged;
}

ParamSnapshot linear_merge(const ParamSnapshot& base, const ParamSnapshot& tuned, double alpha) {
  check_compatible(base, tuned);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  ParamSnapshot merged = base;
  for (std::size_t k = 0; k < merged.values.size(); ++k) {
    merged.values[k] = (1.0 - alpha) * base.values[k] + alpha * tuned.values[k];
  }
  return merged;
}

ParamSnapshot read_snapshot(const std::filesystem::path& path) {
  ParamSnapshot s = read_checkpoint(path);
  check_snapshot(s, "loaded");
  return s;
}

void write_snapshot(const std::filesystem::path& path, const ParamSnapshot& snapshot) {
  check_snapshot(snapshot, "output");
  write_checkpoint(path, snapshot);
}

}  // namespace dler
