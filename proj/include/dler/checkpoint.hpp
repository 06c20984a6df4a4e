#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dler/policy.hpp"

namespace dler {

// Layout (little-endian): "DLRP", u32 version, u32 state count,
// u32 vocab size, then state_count * vocab_size f64 logits row-major.
inline constexpr char kCheckpointMagic[4] = {'D', 'L', 'R', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 16;

struct CheckpointData {
  std::uint32_t version = kCheckpointVersion;
  std::uint32_t state_count = 0;
  std::uint32_t vocab_size = 0;
  std::vector<double> values;

  bool operator==(const CheckpointData&) const = default;
};

std::string encode_checkpoint(const CheckpointData& data);

/// Throws CheckpointFormatError on a bad magic, short payload, trailing
/// bytes or an unsupported version.
CheckpointData decode_checkpoint(const std::string& bytes);

CheckpointData to_checkpoint(const PolicyParams& params);

/// Rebuilds params; the layout must agree with the stored shape.
PolicyParams from_checkpoint(const CheckpointData& data, const Vocab& vocab,
                             const PolicyLayout& layout);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data);
CheckpointData read_checkpoint(const std::filesystem::path& path);

}  // namespace dler
