#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "dler/checkpoint.hpp"

namespace dler {

/// Flat parameter vector with its shape and format version.
using ParamSnapshot = CheckpointData;

inline constexpr double kDefaultTopFraction = 0.25;
inline constexpr double kDefaultMergeScale = 0.7;

/// Indices of the ceil(top_fraction * n) largest |delta| entries, ranked
/// globally; ties go to the lower index. Returned in ascending index order.
std::vector<std::size_t> top_delta_indices(const std::vector<double>& abs_delta,
                                           double top_fraction);

/// base + scale * (tuned - base) on the retained coordinates, base elsewhere.
ParamSnapshot select_merge(const ParamSnapshot& base, const ParamSnapshot& tuned,
                           double top_fraction = kDefaultTopFraction,
                           double scale = kDefaultMergeScale);

/// (1 - alpha) * base + alpha * tuned.
ParamSnapshot linear_merge(const ParamSnapshot& base, const ParamSnapshot& tuned, double alpha);

ParamSnapshot read_snapshot(const std::filesystem::path& path);
void write_snapshot(const std::filesystem::path& path, const ParamSnapshot& snapshot);

}  // namespace dler
