#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace linr {

/// One named f32 tensor of a weights file.
struct NamedArray {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;  // row-major

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
};

/// Named arrays keyed by name; iteration order is the on-disk order because
/// the writer emits entries sorted by name.
using WeightSet = std::map<std::string, NamedArray>;

/// Weights file layout, little-endian:
///   "LNRW" | version u32 | entry count u32 |
///   per entry: name length u16, UTF-8 name, rank u8, dims u32 x rank,
///              f32 payload row-major.
inline constexpr char kWeightsMagic[4] = {'L', 'N', 'R', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

void write_weights(const std::filesystem::path& path, const WeightSet& weights);
std::vector<std::uint8_t> encode_weights(const WeightSet& weights);

WeightSet read_weights(const std::filesystem::path& path);
WeightSet decode_weights(const std::vector<std::uint8_t>& bytes);

}  // namespace linr
