#include <json.hpp>

#include "linr/clause_filter.hpp"
#include "linr/error.hpp"
#include "linr/ingest.hpp"

namespace linr {

using nlohmann::json;

std::string to_json_line(const ChangeRecord& record, const IndexConfig& config) {
  json j;
  j["seq"] = record.seq;
  j["kind"] = record.kind == ChangeKind::kUpsert ? "upsert" : "delete";
  j["id"] = record.item_id;
  if (record.kind == ChangeKind::kUpsert) {
    json emb = json::array();
    for (float v : record.embedding) emb.push_back(static_cast<double>(v));
    j["emb"] = std::move(emb);
    json attrs = json::object();
    for (std::size_t c = 0; c < record.attrs.size() && c < config.clause_schema.size(); ++c) {
      attrs[config.clause_schema[c].name] = record.attrs[c];
    }
    j["attrs"] = std::move(attrs);
  }
  return j.dump();
}

namespace {

std::uint64_t get_u64(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::kParse, std::string("change record: missing '") + key + "'");
  if (!it->is_number_unsigned()) {
    fail(ErrorCode::kParse, std::string("change record: '") + key + "' must be an unsigned integer");
  }
  return it->get<std::uint64_t>();
}

}  // namespace

ChangeRecord parse_change_record(std::string_view line, const IndexConfig& config) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("change record: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "change record: expected a JSON object");

  ChangeRecord record;
  record.seq = get_u64(j, "seq");
  if (record.seq == 0) fail(ErrorCode::kParse, "change record: seq must be >= 1");
  record.item_id = get_u64(j, "id");
  const auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string()) fail(ErrorCode::kParse, "change record: missing 'kind'");
  if (*kind == "delete") {
    record.kind = ChangeKind::kDelete;
    return record;
  }
  if (*kind != "upsert") fail(ErrorCode::kParse, "change record: unknown kind " + kind->dump());
  record.kind = ChangeKind::kUpsert;

  const auto emb = j.find("emb");
  if (emb == j.end() || !emb->is_array()) fail(ErrorCode::kParse, "change record: upsert needs 'emb'");
  record.embedding.reserve(emb->size());
  for (const auto& v : *emb) {
    if (!v.is_number()) fail(ErrorCode::kParse, "change record: 'emb' must hold numbers");
    record.embedding.push_back(v.get<float>());
  }

  record.attrs.assign(config.clause_schema.size(), {});
  if (const auto attrs = j.find("attrs"); attrs != j.end()) {
    if (!attrs->is_object()) fail(ErrorCode::kParse, "change record: 'attrs' must be an object");
    for (const auto& [name, list] : attrs->items()) {
      const std::size_t c = config.clause_index(name);
      if (!list.is_array()) fail(ErrorCode::kParse, "change record: attrs." + name + " must be an array");
      for (const auto& a : list) {
        if (!a.is_number_unsigned()) {
          fail(ErrorCode::kParse, "change record: attribute ids must be unsigned integers");
        }
        record.attrs[c].push_back(a.get<std::uint64_t>());
      }
      normalize_attrs(record.attrs[c]);
    }
  }
  validate_upsert_record(config, record);
  return record;
}

LogScan read_change_log(const std::filesystem::path& path, const IndexConfig& config,
                        std::uint64_t offset) {
  LogScan scan;
  scan.end_offset = offset;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scan;
  in.seekg(static_cast<std::streamoff>(offset));
  std::string buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (true) {
    const std::size_t nl = buffer.find('\n', pos);
    if (nl == std::string::npos) break;
    std::string_view line(buffer.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      scan.records.push_back(parse_change_record(line, config));
    } catch (const Error& e) {
      ++scan.poison;
      scan.last_error = e.what();
    }
  }
  scan.end_offset = offset + pos;
  return scan;
}

ChangeLogWriter::ChangeLogWriter(std::filesystem::path path, IndexConfig config)
    : path_(std::move(path)), config_(std::move(config)) {
  const LogScan existing = read_change_log(path_, config_);
  for (const auto& r : existing.records) last_seq_ = std::max(last_seq_, r.seq);
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) fail(ErrorCode::kIo, "cannot open change log '" + path_.string() + "' for append");
}

std::uint64_t ChangeLogWriter::append(ChangeRecord record) {
  if (record.kind == ChangeKind::kUpsert) validate_upsert_record(config_, record);
  std::lock_guard lock(mutex_);
  record.seq = last_seq_ + 1;
  write_line(record);
  return record.seq;
}

void ChangeLogWriter::append_with_seq(const ChangeRecord& record) {
  if (record.kind == ChangeKind::kUpsert) validate_upsert_record(config_, record);
  std::lock_guard lock(mutex_);
  if (record.seq <= last_seq_) {
    fail(ErrorCode::kCorruption, "change log seq " + std::to_string(record.seq) +
                                     " does not exceed " + std::to_string(last_seq_));
  }
  write_line(record);
}

void ChangeLogWriter::write_line(const ChangeRecord& record) {
  out_ << to_json_line(record, config_) << '\n';
  out_.flush();
  if (!out_) fail(ErrorCode::kIo, "append to '" + path_.string() + "' failed");
  last_seq_ = record.seq;
}

std::uint64_t ChangeLogWriter::last_seq() const {
  std::lock_guard lock(mutex_);
  return last_seq_;
}

}  // namespace linr
