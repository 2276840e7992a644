#pragma once

#include <filesystem>
#include <string>

#include "linr/bench.hpp"
#include "linr/config.hpp"
#include "linr/scoring.hpp"

namespace linr {

struct AppPaths {
  std::filesystem::path data_dir;
  std::filesystem::path snapshot;   // default <data_dir>/index.lnrs
  std::filesystem::path changelog;  // default <data_dir>/changes.jsonl
  std::filesystem::path fixtures;   // default <data_dir>
  std::filesystem::path report;     // default <data_dir>/report.json
};

/// Operator configuration file:
///   {"index": {...}, "bench": {...}, "scorer": {...}, "paths": {...},
///    "service": {"bind": "host:port", "threads": n}}
/// Without an "index" section the index mirrors the bench section.
struct AppConfig {
  IndexConfig index;
  BenchConfig bench;
  ScorerSpec scorer;
  AppPaths paths;
  std::string bind = "127.0.0.1:8080";
  std::size_t threads = 1;
};

/// Data directory from LINR_DATA_DIR, else "./linr-data".
std::filesystem::path default_data_dir();

/// Built-in defaults: desk-scale bench (10^5 x 128, k = 200) with one Match
/// clause near 11% selectivity and one ReverseMatch clause near 99%.
AppConfig default_app_config();

/// Throws kParse for malformed JSON and kInvalidArgument for bad values.
AppConfig parse_app_config(const std::string& text);
AppConfig load_app_config(const std::filesystem::path& path);

std::string polarity_name(Polarity polarity);
Polarity parse_polarity(const std::string& name);

}  // namespace linr
