#include <algorithm>

#include "linr/binary_io.hpp"
#include "linr/error.hpp"
#include "linr/ingest.hpp"

namespace linr {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

std::vector<std::uint8_t> encode(const Index& index, const std::string& weights_ref,
                                 ValuePrecision precision, std::uint64_t& watermark) {
  std::vector<ItemRecord> items;
  {
    auto paused = index.quiesce();
    items = index.export_live();
    watermark = index.applied_seq();
  }
  const IndexConfig& config = index.config();

  ByteWriter w;
  w.put_bytes({kSnapshotMagic, 4});
  w.put<std::uint32_t>(kSnapshotVersion);
  w.put<std::uint64_t>(items.size());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(config.dim));
  w.put<std::uint32_t>(config.quant_bits);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(config.clause_schema.size()));
  for (const auto& clause : config.clause_schema) {
    w.put<std::uint32_t>(clause.max_attrs);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(clause.polarity));
    w.put_string16(clause.name);
  }
  w.put<std::uint64_t>(watermark);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(precision));
  w.put<std::uint64_t>(config.seed);
  w.put_string16(weights_ref);

  for (const auto& item : items) w.put<std::uint64_t>(item.id);
  for (const auto& item : items) {
    if (precision == ValuePrecision::kF32) {
      w.put_span<float>(item.embedding);
    } else {
      for (float v : item.embedding) w.put<std::uint16_t>(detail::float_to_half(v));
    }
  }
  for (std::size_t c = 0; c < config.clause_schema.size(); ++c) {
    for (const auto& item : items) w.put<std::uint32_t>(static_cast<std::uint32_t>(item.attrs[c].size()));
    const std::size_t width = config.clause_schema[c].max_attrs;
    for (const auto& item : items) {
      w.put_span<std::uint64_t>(item.attrs[c]);
      for (std::size_t pad = item.attrs[c].size(); pad < width; ++pad) w.put<std::uint64_t>(kAttrSentinel);
    }
  }
  for (const auto& item : items) w.put_span<std::uint64_t>(item.code);
  return std::move(w.bytes());
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const Index& index, const std::string& weights_ref,
                                          ValuePrecision precision) {
  std::uint64_t watermark = 0;
  return encode(index, weights_ref, precision, watermark);
}

std::uint64_t write_snapshot(const Index& index, const std::filesystem::path& path,
                             const std::string& weights_ref, ValuePrecision precision) {
  std::uint64_t watermark = 0;
  const auto bytes = encode(index, weights_ref, precision, watermark);
  detail::write_file_atomic(path, bytes);
  return watermark;
}

namespace {

SnapshotHeader parse_header(ByteReader& r) {
  if (r.get_bytes(4) != std::string_view(kSnapshotMagic, 4)) fail(ErrorCode::kParse, "snapshot: bad magic");
  SnapshotHeader h;
  h.version = r.get<std::uint32_t>();
  if (h.version != kSnapshotVersion) {
    fail(ErrorCode::kParse, "snapshot: unsupported version " + std::to_string(h.version));
  }
  h.count = r.get<std::uint64_t>();
  h.dim = r.get<std::uint32_t>();
  h.quant_bits = r.get<std::uint32_t>();
  const auto clauses = r.get<std::uint16_t>();
  for (std::uint16_t c = 0; c < clauses; ++c) {
    ClauseSpec spec;
    spec.max_attrs = r.get<std::uint32_t>();
    const auto polarity = r.get<std::uint8_t>();
    if (polarity > 1) fail(ErrorCode::kParse, "snapshot: bad clause polarity");
    spec.polarity = static_cast<Polarity>(polarity);
    spec.name = r.get_string16();
    h.clauses.push_back(std::move(spec));
  }
  h.seq_watermark = r.get<std::uint64_t>();
  const auto precision = r.get<std::uint8_t>();
  if (precision != 2 && precision != 4) fail(ErrorCode::kParse, "snapshot: bad value precision");
  h.precision = static_cast<ValuePrecision>(precision);
  h.seed = r.get<std::uint64_t>();
  h.weights_ref = r.get_string16();
  return h;
}

void check_compatible(const SnapshotHeader& h, const IndexConfig& config) {
  if (h.dim != config.dim) {
    fail(ErrorCode::kSchema, "snapshot field 'dim' is " + std::to_string(h.dim) + ", config has " +
                                 std::to_string(config.dim));
  }
  if (h.quant_bits != config.quant_bits) {
    fail(ErrorCode::kSchema, "snapshot field 'quant_bits' is " + std::to_string(h.quant_bits) +
                                 ", config has " + std::to_string(config.quant_bits));
  }
  if (h.quant_bits > 0 && h.seed != config.seed) {
    fail(ErrorCode::kSchema, "snapshot field 'seed' differs from config");
  }
  if (h.clauses != config.clause_schema) {
    fail(ErrorCode::kSchema, "snapshot field 'clause_schema' differs from config");
  }
  if (h.count > config.capacity) {
    fail(ErrorCode::kSchema, "snapshot field 'count' (" + std::to_string(h.count) +
                                 ") exceeds config capacity " + std::to_string(config.capacity));
  }
}

}  // namespace

SnapshotHeader read_snapshot_header(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  ByteReader r(bytes, "snapshot");
  return parse_header(r);
}

std::unique_ptr<Index> decode_snapshot(const std::vector<std::uint8_t>& bytes,
                                       const IndexConfig& config) {
  ByteReader r(bytes, "snapshot");
  const SnapshotHeader h = parse_header(r);
  check_compatible(h, config);

  const std::size_t n = h.count;
  const std::size_t words = h.quant_bits / 64;
  std::size_t section_bytes = n * 8 + n * h.dim * static_cast<std::size_t>(h.precision) + n * words * 8;
  for (const auto& c : h.clauses) section_bytes += n * 4 + n * c.max_attrs * 8;
  if (r.remaining() < section_bytes) fail(ErrorCode::kParse, "snapshot: truncated sections");
  if (r.remaining() > section_bytes) fail(ErrorCode::kParse, "snapshot: trailing bytes");

  std::vector<std::uint64_t> ids(n);
  r.get_span<std::uint64_t>(ids);
  std::vector<float> embeddings(n * h.dim);
  if (h.precision == ValuePrecision::kF32) {
    r.get_span<float>(embeddings);
  } else {
    for (auto& v : embeddings) v = detail::half_to_float(r.get<std::uint16_t>());
  }
  std::vector<std::vector<std::vector<std::uint64_t>>> attrs(
      n, std::vector<std::vector<std::uint64_t>>(h.clauses.size()));
  for (std::size_t c = 0; c < h.clauses.size(); ++c) {
    std::vector<std::uint32_t> counts(n);
    r.get_span<std::uint32_t>(counts);
    const std::size_t width = h.clauses[c].max_attrs;
    std::vector<std::uint64_t> row(width);
    for (std::size_t i = 0; i < n; ++i) {
      r.get_span<std::uint64_t>(row);
      if (counts[i] > width) fail(ErrorCode::kCorruption, "snapshot: attribute count exceeds width");
      attrs[i][c].assign(row.begin(), row.begin() + counts[i]);
    }
  }
  std::vector<std::uint64_t> codes(n * words);
  r.get_span<std::uint64_t>(codes);

  auto index = create_index(config);
  for (std::size_t i = 0; i < n; ++i) {
    if (index->contains(ids[i])) fail(ErrorCode::kCorruption, "snapshot: duplicate id " + std::to_string(ids[i]));
    std::span<const float> emb(embeddings.data() + i * h.dim, h.dim);
    index->upsert(ChangeRecord::upsert(ids[i], {emb.begin(), emb.end()}, std::move(attrs[i])));
  }
  if (words > 0 && h.precision == ValuePrecision::kF32) {
    for (const auto& item : index->export_live()) {
      const std::size_t i = item.slot;  // slots were assigned 0..n-1 in file order
      if (!std::equal(item.code.begin(), item.code.end(), codes.begin() + i * words)) {
        fail(ErrorCode::kCorruption, "snapshot: stored code of id " + std::to_string(item.id) +
                                         " disagrees with its embedding");
      }
    }
  }
  index->set_applied_seq(h.seq_watermark);
  return index;
}

std::unique_ptr<Index> load_snapshot(const std::filesystem::path& path, const IndexConfig& config) {
  return decode_snapshot(detail::read_file(path), config);
}

}  // namespace linr
