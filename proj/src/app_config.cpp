#include "linr/app_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "linr/error.hpp"

namespace linr {

using nlohmann::json;

std::string polarity_name(Polarity polarity) {
  return polarity == Polarity::kMatch ? "match" : "reverse";
}

Polarity parse_polarity(const std::string& name) {
  if (name == "match") return Polarity::kMatch;
  if (name == "reverse" || name == "reverse_match") return Polarity::kReverseMatch;
  fail(ErrorCode::kInvalidArgument, "unknown clause polarity '" + name + "'");
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("LINR_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "linr-data";
}

namespace {

void fill_paths(AppPaths& paths) {
  if (paths.data_dir.empty()) paths.data_dir = default_data_dir();
  if (paths.snapshot.empty()) paths.snapshot = paths.data_dir / "index.lnrs";
  if (paths.changelog.empty()) paths.changelog = paths.data_dir / "changes.jsonl";
  if (paths.fixtures.empty()) paths.fixtures = paths.data_dir;
  if (paths.report.empty()) paths.report = paths.data_dir / "report.json";
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

ClauseProfile parse_profile(const json& j) {
  ClauseProfile p;
  read(j, "name", p.name);
  if (auto it = j.find("polarity"); it != j.end()) p.polarity = parse_polarity(it->get<std::string>());
  read(j, "universe", p.universe);
  read(j, "attrs_min", p.attrs_min);
  read(j, "attrs_max", p.attrs_max);
  read(j, "selectivity", p.selectivity);
  return p;
}

}  // namespace

AppConfig default_app_config() {
  AppConfig config;
  config.bench.clauses = {
      {"region", Polarity::kMatch, 100, 1, 1, 0.11},
      {"blocked", Polarity::kReverseMatch, 10000, 1, 2, 0.99},
  };
  config.bench.algos = {Algo::kV1, Algo::kV2, Algo::kV3};
  config.index = config.bench.index_config();
  fill_paths(config.paths);
  return config;
}

AppConfig parse_app_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "config: expected a JSON object");

  AppConfig config = default_app_config();
  config.paths = {};
  try {
    if (auto b = j.find("bench"); b != j.end()) {
      BenchConfig& bench = config.bench;
      read(*b, "n_items", bench.n_items);
      read(*b, "dim", bench.dim);
      read(*b, "quant_bits", bench.quant_bits);
      read(*b, "n_queries", bench.n_queries);
      read(*b, "warmup_queries", bench.warmup_queries);
      read(*b, "k", bench.k);
      read(*b, "n_clusters", bench.n_clusters);
      read(*b, "cluster_spread", bench.cluster_spread);
      read(*b, "batch_sizes", bench.batch_sizes);
      read(*b, "keep_fractions", bench.keep_fractions);
      read(*b, "update_rates", bench.update_rates);
      read(*b, "threads", bench.threads);
      read(*b, "seed", bench.seed);
      if (auto it = b->find("algos"); it != b->end()) {
        bench.algos.clear();
        for (const auto& name : *it) bench.algos.push_back(parse_algo(name.get<std::string>()));
      }
      if (auto it = b->find("clauses"); it != b->end()) {
        bench.clauses.clear();
        for (const auto& c : *it) bench.clauses.push_back(parse_profile(c));
      }
      bench.validate();
    }
    config.index = config.bench.index_config();
    if (auto ix = j.find("index"); ix != j.end()) {
      IndexConfig& index = config.index;
      read(*ix, "capacity", index.capacity);
      read(*ix, "dim", index.dim);
      read(*ix, "quant_bits", index.quant_bits);
      read(*ix, "seed", index.seed);
      read(*ix, "memory_budget_bytes", index.memory_budget_bytes);
      if (auto it = ix->find("clauses"); it != ix->end()) {
        index.clause_schema.clear();
        for (const auto& c : *it) {
          ClauseSpec spec;
          read(c, "name", spec.name);
          if (auto p = c.find("polarity"); p != c.end()) spec.polarity = parse_polarity(p->get<std::string>());
          read(c, "max_attrs", spec.max_attrs);
          index.clause_schema.push_back(std::move(spec));
        }
      }
    }
    config.index.validate();
    if (auto s = j.find("scorer"); s != j.end()) {
      if (auto it = s->find("kind"); it != s->end()) config.scorer.kind = parse_scorer_kind(it->get<std::string>());
      if (auto it = s->find("weights"); it != s->end()) config.scorer.weights_path = it->get<std::string>();
      read(*s, "components", config.scorer.components);
      if (auto it = s->find("num_clusters"); it != s->end()) config.scorer.num_clusters = it->get<std::size_t>();
      config.scorer.validate();
    }
    if (auto p = j.find("paths"); p != j.end()) {
      auto path_of = [&](const char* key, std::filesystem::path& out) {
        if (auto it = p->find(key); it != p->end()) out = it->get<std::string>();
      };
      path_of("data_dir", config.paths.data_dir);
      path_of("snapshot", config.paths.snapshot);
      path_of("changelog", config.paths.changelog);
      path_of("fixtures", config.paths.fixtures);
      path_of("report", config.paths.report);
    }
    if (auto s = j.find("service"); s != j.end()) {
      read(*s, "bind", config.bind);
      read(*s, "threads", config.threads);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  fill_paths(config.paths);
  return config;
}

AppConfig load_app_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_app_config(text.str());
}

}  // namespace linr
