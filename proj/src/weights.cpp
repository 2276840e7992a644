#include "linr/weights.hpp"

#include <fstream>

#include "linr/binary_io.hpp"
#include "linr/error.hpp"

namespace linr {

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read failed on '" + path.string() + "'");
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot create '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "rename to '" + path.string() + "' failed: " + ec.message());
}

}  // namespace detail

std::vector<std::uint8_t> encode_weights(const WeightSet& weights) {
  detail::ByteWriter w;
  w.put_bytes({kWeightsMagic, 4});
  w.put<std::uint32_t>(kWeightsVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(weights.size()));
  for (const auto& [name, array] : weights) {
    std::size_t elems = 1;
    for (auto d : array.shape) elems *= d;
    if (elems != array.data.size()) {
      fail(ErrorCode::kShape, "weights entry '" + name + "': shape does not match payload");
    }
    if (array.shape.size() > 255) fail(ErrorCode::kShape, "weights entry '" + name + "': rank > 255");
    w.put_string16(name);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(array.shape.size()));
    for (auto d : array.shape) w.put<std::uint32_t>(d);
    w.put_span<float>(array.data);
  }
  return std::move(w.bytes());
}

void write_weights(const std::filesystem::path& path, const WeightSet& weights) {
  detail::write_file_atomic(path, encode_weights(weights));
}

WeightSet decode_weights(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "weights file");
  if (r.get_bytes(4) != std::string_view(kWeightsMagic, 4)) {
    fail(ErrorCode::kParse, "weights file: bad magic");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kWeightsVersion) {
    fail(ErrorCode::kParse, "weights file: unsupported version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  WeightSet weights;
  for (std::uint32_t e = 0; e < count; ++e) {
    std::string name = r.get_string16();
    NamedArray array;
    const auto rank = r.get<std::uint8_t>();
    std::size_t elems = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
      array.shape.push_back(r.get<std::uint32_t>());
      elems *= array.shape.back();
    }
    r.need(elems * sizeof(float));
    array.data.resize(elems);
    r.get_span<float>(array.data);
    if (!weights.emplace(name, std::move(array)).second) {
      fail(ErrorCode::kParse, "weights file: duplicate entry '" + name + "'");
    }
  }
  if (r.remaining() != 0) fail(ErrorCode::kParse, "weights file: trailing bytes");
  return weights;
}

WeightSet read_weights(const std::filesystem::path& path) {
  return decode_weights(detail::read_file(path));
}

}  // namespace linr
