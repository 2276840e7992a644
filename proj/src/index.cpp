#include "linr/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "linr/error.hpp"

namespace linr {

Index::Index(IndexConfig config) : config_(std::move(config)) {
  config_.validate();
  const MemoryFootprint fp = estimate_footprint(config_);
  if (fp.total() > config_.memory_budget_bytes) {
    fail(ErrorCode::kAllocationRefused,
         "index needs " + std::to_string(fp.total()) + " bytes, budget is " +
             std::to_string(config_.memory_budget_bytes));
  }
  const std::size_t cap = config_.capacity;
  if (config_.quant_bits > 0) {
    oporp_ = OporpParams::make(config_.dim, config_.quant_bits, config_.seed);
  }
  embeddings_.assign(cap * config_.dim, 0.0f);
  clauses_ = ClauseStore(config_.clause_schema, cap);
  codes_.assign(cap * code_words(), 0);
  slot_to_id_.assign(cap, 0);
  live_.assign(cap, 0);
  versions_.reset(new std::atomic<std::uint32_t>[cap]());
}

std::unique_ptr<Index> create_index(IndexConfig config) {
  return std::make_unique<Index>(std::move(config));
}

void validate_upsert_record(const IndexConfig& config, const ChangeRecord& record) {
  if (record.kind != ChangeKind::kUpsert) {
    fail(ErrorCode::kInvalidArgument, "expected an upsert record");
  }
  if (record.embedding.size() != config.dim) {
    fail(ErrorCode::kShape, "embedding has " + std::to_string(record.embedding.size()) +
                                " values, index dim is " + std::to_string(config.dim));
  }
  for (float v : record.embedding) {
    if (!std::isfinite(v)) fail(ErrorCode::kShape, "embedding contains a non-finite value");
  }
  const auto& schema = config.clause_schema;
  if (record.attrs.size() != schema.size()) {
    fail(ErrorCode::kShape, "record has " + std::to_string(record.attrs.size()) +
                                " attribute lists, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (record.attrs[c].size() > schema[c].max_attrs) {
      fail(ErrorCode::kShape, "clause '" + schema[c].name + "' holds at most " +
                                  std::to_string(schema[c].max_attrs) + " attributes");
    }
  }
}

std::uint32_t Index::upsert(std::uint64_t id, std::span<const float> embedding,
                            std::vector<std::vector<std::uint64_t>> attrs) {
  return upsert(ChangeRecord::upsert(id, {embedding.begin(), embedding.end()}, std::move(attrs)));
}

std::uint32_t Index::upsert(const ChangeRecord& record) {
  validate_upsert(record);
  auto attrs = record.attrs;
  for (auto& list : attrs) normalize_attrs(list);
  BitCode code;
  if (oporp_) code = oporp_encode(*oporp_, record.embedding);

  std::lock_guard writer(writer_mutex_);
  std::optional<std::uint32_t> existing;
  {
    std::shared_lock lock(id_map_mutex_);
    if (auto it = id_to_slot_.find(record.item_id); it != id_to_slot_.end()) existing = it->second;
  }
  if (existing) {
    write_row(*existing, record.item_id, record.embedding, attrs, code);
    return *existing;
  }

  const std::uint32_t slot = claim_slot();
  write_row(slot, record.item_id, record.embedding, attrs, code);
  {
    std::unique_lock lock(id_map_mutex_);
    id_to_slot_.emplace(record.item_id, slot);
  }
  if (slot >= hwm_.load(std::memory_order_relaxed)) {
    hwm_.store(slot + 1, std::memory_order_release);
  }
  live_count_.fetch_add(1, std::memory_order_acq_rel);
  return slot;
}

bool Index::erase(std::uint64_t id) {
  std::lock_guard writer(writer_mutex_);
  std::uint32_t slot;
  {
    std::unique_lock lock(id_map_mutex_);
    auto it = id_to_slot_.find(id);
    if (it == id_to_slot_.end()) return false;
    slot = it->second;
    id_to_slot_.erase(it);
  }
  begin_write(slot);
  live_[slot] = 0;
  end_write(slot);
  free_slots_.insert(slot);
  live_count_.fetch_sub(1, std::memory_order_acq_rel);
  return true;
}

void Index::apply(const ChangeRecord& record) {
  if (record.kind == ChangeKind::kUpsert) {
    upsert(record);
  } else {
    erase(record.item_id);
  }
  applied_seq_.store(record.seq, std::memory_order_release);
}

std::uint32_t Index::claim_slot() {
  if (!free_slots_.empty()) {
    const std::uint32_t slot = *free_slots_.begin();
    free_slots_.erase(free_slots_.begin());
    return slot;
  }
  const std::size_t next = hwm_.load(std::memory_order_relaxed);
  if (next >= config_.capacity) {
    fail(ErrorCode::kCapacityExhausted,
         "index is full (capacity " + std::to_string(config_.capacity) + ")");
  }
  return static_cast<std::uint32_t>(next);
}

void Index::begin_write(std::size_t slot) {
  const std::uint32_t v = versions_[slot].load(std::memory_order_relaxed);
  versions_[slot].store(v + 1, std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_release);
}

void Index::end_write(std::size_t slot) {
  const std::uint32_t v = versions_[slot].load(std::memory_order_relaxed);
  versions_[slot].store(v + 1, std::memory_order_release);
}

void Index::write_row(std::size_t slot, std::uint64_t id, std::span<const float> embedding,
                      const std::vector<std::vector<std::uint64_t>>& attrs, const BitCode& code) {
  begin_write(slot);
  std::memcpy(embeddings_.data() + slot * config_.dim, embedding.data(),
              config_.dim * sizeof(float));
  for (std::size_t c = 0; c < attrs.size(); ++c) clauses_.set_row(c, slot, attrs[c]);
  if (!code.empty()) {
    std::copy(code.begin(), code.end(), codes_.begin() + slot * code_words());
  }
  slot_to_id_[slot] = id;
  live_[slot] = 1;
  end_write(slot);
}

SlotView Index::view(std::size_t slot) const {
  const std::size_t words = code_words();
  return SlotView{slot,
                  live_[slot] != 0,
                  slot_to_id_[slot],
                  {embeddings_.data() + slot * config_.dim, config_.dim},
                  {codes_.data() + slot * words, words},
                  &clauses_};
}

ItemRecord Index::copy_item(const SlotView& v) const {
  ItemRecord item;
  item.id = v.id;
  item.slot = static_cast<std::uint32_t>(v.slot);
  item.embedding.assign(v.embedding.begin(), v.embedding.end());
  item.attrs.reserve(clauses_.num_clauses());
  for (std::size_t c = 0; c < clauses_.num_clauses(); ++c) {
    auto row = v.attrs(c);
    item.attrs.emplace_back(row.begin(), row.end());
  }
  item.code.assign(v.code.begin(), v.code.end());
  return item;
}

bool Index::contains(std::uint64_t id) const { return slot_of(id).has_value(); }

std::optional<std::uint32_t> Index::slot_of(std::uint64_t id) const {
  std::shared_lock lock(id_map_mutex_);
  auto it = id_to_slot_.find(id);
  if (it == id_to_slot_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemRecord> Index::get(std::uint64_t id) const {
  const auto slot = slot_of(id);
  if (!slot) return std::nullopt;
  auto [item, version] = read_slot(*slot, [&](const SlotView& v) -> std::optional<ItemRecord> {
    if (!v.live || v.id != id) return std::nullopt;
    return copy_item(v);
  });
  return item;
}

std::vector<ItemRecord> Index::export_live() const {
  std::vector<ItemRecord> items;
  const std::size_t hwm = high_water_mark();
  for (std::size_t slot = 0; slot < hwm; ++slot) {
    auto [item, version] = read_slot(slot, [&](const SlotView& v) -> std::optional<ItemRecord> {
      if (!v.live) return std::nullopt;
      return copy_item(v);
    });
    if (item) items.push_back(std::move(*item));
  }
  return items;
}

FilterMask Index::eval_query_filter(const QueryFilter& filter) const {
  check_filter_arity(clauses_, filter);
  FilterMask out;
  const std::size_t hwm = high_water_mark();
  out.mask.resize(hwm);
  out.versions.resize(hwm);
  for (std::size_t slot = 0; slot < hwm; ++slot) {
    auto [pass, version] =
        read_slot(slot, [&](const SlotView& v) { return slot_passes(v, filter); });
    out.mask[slot] = pass ? 1 : 0;
    out.versions[slot] = version;
    out.pass_count += pass ? 1 : 0;
  }
  return out;
}

bool same_live_items(const Index& a, const Index& b) {
  auto lhs = a.export_live();
  auto rhs = b.export_live();
  if (lhs.size() != rhs.size()) return false;
  auto by_id = [](const ItemRecord& x, const ItemRecord& y) { return x.id < y.id; };
  std::sort(lhs.begin(), lhs.end(), by_id);
  std::sort(rhs.begin(), rhs.end(), by_id);
  return lhs == rhs;
}

}  // namespace linr
