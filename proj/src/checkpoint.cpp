#include "dler/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dler/errors.hpp"

namespace dler {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  }
  return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  }
  return v;
}

}  // namespace

std::string encode_checkpoint(const CheckpointData& data) {
  const auto expected = static_cast<std::size_t>(data.state_count) * data.vocab_size;
  if (data.values.size() != expected) {
    throw AlignmentError("checkpoint holds " + std::to_string(data.values.size()) +
                         " values, shape needs " + std::to_string(expected));
  }
  std::string out;
  out.reserve(kCheckpointHeaderBytes + 8 * data.values.size());
  out.append(kCheckpointMagic, 4);
  put_u32(out, data.version);
  put_u32(out, data.state_count);
  put_u32(out, data.vocab_size);
  for (double v : data.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

CheckpointData decode_checkpoint(const std::string& bytes) {
  using Kind = CheckpointFormatError::Kind;
  if (bytes.size() < kCheckpointHeaderBytes) {
    throw CheckpointFormatError(Kind::MalformedHeader, "checkpoint shorter than its header");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointFormatError(Kind::MalformedHeader, "checkpoint magic bytes are not DLRP");
  }
  CheckpointData data;
  data.version = get_u32(bytes, 4);
  if (data.version != kCheckpointVersion) {
    throw CheckpointFormatError(Kind::VersionMismatch,
                                "checkpoint format version " + std::to_string(data.version) +
                                    " (supported: " + std::to_string(kCheckpointVersion) + ")");
  }
  data.state_count = get_u32(bytes, 8);
  data.vocab_size = get_u32(bytes, 12);
  const auto count = static_cast<std::uint64_t>(data.state_count) * data.vocab_size;
  const std::uint64_t need = kCheckpointHeaderBytes + 8 * count;
  if (bytes.size() < need) {
    throw CheckpointFormatError(Kind::TruncatedPayload,
                                "checkpoint payload has " + std::to_string(bytes.size()) +
                                    " bytes, header promises " + std::to_string(need));
  }
  if (bytes.size() > need) {
    throw CheckpointFormatError(Kind::MalformedHeader, "checkpoint has trailing bytes");
  }
  data.values.resize(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < data.values.size(); ++k) {
    data.values[k] = std::bit_cast<double>(get_u64(bytes, kCheckpointHeaderBytes + 8 * k));
  }
  return data;
}

CheckpointData to_checkpoint(const PolicyParams& params) {
  return {kCheckpointVersion, static_cast<std::uint32_t>(params.state_count()),
          static_cast<std::uint32_t>(params.vocab_size()),
          std::vector<double>(params.logits().begin(), params.logits().end())};
}

PolicyParams from_checkpoint(const CheckpointData& data, const Vocab& vocab,
                             const PolicyLayout& layout) {
  PolicyParams shape(vocab, layout);
  if (static_cast<int>(data.state_count) != shape.state_count() ||
      static_cast<int>(data.vocab_size) != shape.vocab_size()) {
    throw IncompatibleSnapshotError("checkpoint shape " + std::to_string(data.state_count) + "x" +
                                    std::to_string(data.vocab_size) + " does not match layout " +
                                    std::to_string(shape.state_count()) + "x" +
                                    std::to_string(shape.vocab_size()));
  }
  return PolicyParams(vocab, layout, data.values);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  write_file_atomic(path, encode_checkpoint(data));
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace dler
