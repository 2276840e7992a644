#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "linr/app_config.hpp"
#include "linr/bench.hpp"
#include "linr/error.hpp"
#include "linr/ingest.hpp"
#include "linr/service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

linr::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string bind;
  std::string bits = "64,128,256,512";
  std::size_t pairs = 10000;
  std::size_t dim = 128;
  std::size_t seeds = 5;
  std::string log;
  std::string out;
  bool offline = false;
};

linr::AppConfig resolve(const Options& o) {
  linr::AppConfig config = o.config.empty() ? linr::default_app_config() : linr::load_app_config(o.config);
  if (o.seed) {
    config.bench.seed = *o.seed;
    config.index.seed = *o.seed;
  }
  if (o.threads) {
    config.threads = *o.threads;
    config.bench.threads = *o.threads;
  }
  if (!o.bind.empty()) config.bind = o.bind;
  return config;
}

std::vector<std::uint32_t> parse_bits(const std::string& text) {
  std::vector<std::uint32_t> bits;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      bits.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--bits", "expected a comma separated list of integers");
    }
  }
  if (bits.empty()) throw CLI::ValidationError("--bits", "empty list");
  return bits;
}

int cmd_gen(const linr::AppConfig& config) {
  const auto paths = linr::gen_synthetic(config.bench, config.paths.fixtures);
  std::cout << "wrote " << paths.changelog.string() << " and " << paths.queries.string() << "\n";
  return kExitOk;
}

int cmd_build(const linr::AppConfig& config, const Options& o) {
  const std::filesystem::path log = o.log.empty() ? config.paths.changelog : std::filesystem::path(o.log);
  const std::filesystem::path out = o.out.empty() ? config.paths.snapshot : std::filesystem::path(o.out);
  const auto boot = linr::bootstrap(std::nullopt, log, config.index);
  const auto watermark = linr::write_snapshot(*boot.index, out, config.scorer.weights_path.value_or(""));
  std::cout << "snapshot " << out.string() << ": " << boot.index->live_count() << " items, seq watermark "
            << watermark << ", " << boot.poison << " malformed log lines skipped\n";
  return kExitOk;
}

int cmd_snapshot(const linr::AppConfig& config, const Options& o) {
  const std::filesystem::path out = o.out.empty() ? config.paths.snapshot : std::filesystem::path(o.out);
  if (!o.offline) {
    // Ask a running service to compact itself.
    const auto [host, port] = linr::parse_bind(config.bind);
    httplib::Client client(host, port);
    auto res = client.Post("/snapshot", "{}", "application/json");
    if (res) {
      std::cout << res->body << "\n";
      return res->status == 200 ? kExitOk : kExitData;
    }
    std::cerr << "no service at " << config.bind << ", compacting offline\n";
  }
  std::optional<std::filesystem::path> base;
  if (std::filesystem::exists(config.paths.snapshot)) base = config.paths.snapshot;
  const auto boot = linr::bootstrap(base, config.paths.changelog, config.index);
  const auto watermark = linr::write_snapshot(*boot.index, out, config.scorer.weights_path.value_or(""));
  std::cout << "snapshot " << out.string() << ": " << boot.index->live_count() << " items, seq watermark "
            << watermark << "\n";
  return kExitOk;
}

int cmd_serve(const linr::AppConfig& config) {
  linr::ServiceOptions options;
  options.index = config.index;
  options.scorer = config.scorer;
  options.snapshot = config.paths.snapshot;
  options.changelog = config.paths.changelog;
  options.snapshot_out = config.paths.snapshot;
  options.threads = config.threads;
  std::filesystem::create_directories(config.paths.changelog.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : config.paths.changelog.parent_path());
  linr::Service service(options);
  const auto [host, port] = linr::parse_bind(config.bind);
  const int bound = service.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << config.bind << "\n";
    return kExitData;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.bootstrap_async();
  std::cerr << "listening on " << host << ":" << bound << "\n";
  service.listen();
  g_service = nullptr;
  return kExitOk;
}

int cmd_bench(const linr::AppConfig& config) {
  const auto report = linr::run_benchmark(config.bench, config.paths.fixtures, config.paths.snapshot);
  std::cout << report.to_table();
  std::filesystem::create_directories(config.paths.report.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : config.paths.report.parent_path());
  std::ofstream(config.paths.report) << report.to_json() << "\n";
  std::cout << "report written to " << config.paths.report.string() << "\n";
  return kExitOk;
}

int cmd_quantize_eval(const Options& o, const linr::AppConfig& config) {
  const auto bits = parse_bits(o.bits);
  const std::uint64_t base_seed = o.seed.value_or(config.index.seed);
  std::printf("%8s %16s %16s\n", "bits", "mean_abs_error", "max_abs_error");
  for (std::uint32_t b : bits) {
    double mean = 0.0;
    double worst = 0.0;
    for (std::size_t s = 0; s < o.seeds; ++s) {
      const auto row = linr::quantize_eval(o.dim, b, o.pairs, base_seed + s);
      mean += row.mean_abs_error;
      worst = std::max(worst, row.max_abs_error);
    }
    std::printf("%8u %16.5f %16.5f\n", b, mean / static_cast<double>(o.seeds), worst);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linr: filtered exhaustive embedding retrieval"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config, "JSON config file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the seed");
    sub->add_option("--threads", o.threads, "Worker threads");
  };

  auto* gen = app.add_subcommand("gen", "Write synthetic fixtures (change log + queries)");
  add_common(gen, false);
  auto* build = app.add_subcommand("build", "Replay a change log into a snapshot");
  add_common(build, false);
  build->add_option("--log", o.log, "Change log (default from config)");
  build->add_option("--out", o.out, "Snapshot path (default from config)");
  auto* serve = app.add_subcommand("serve", "Bootstrap from snapshot + log and serve HTTP");
  add_common(serve, false);
  serve->add_option("--bind", o.bind, "host:port");
  auto* bench = app.add_subcommand("bench", "Run the latency/recall benchmark");
  add_common(bench, true);
  auto* quant = app.add_subcommand("quantize-eval", "Sign-code cosine estimator accuracy sweep");
  add_common(quant, false);
  quant->add_option("--bits", o.bits, "Comma separated code widths");
  quant->add_option("--dim", o.dim, "Embedding dimension");
  quant->add_option("--pairs", o.pairs, "Random pairs per seed");
  quant->add_option("--seeds", o.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  auto* snap = app.add_subcommand("snapshot", "Compact a running service or the on-disk state");
  add_common(snap, false);
  snap->add_option("--bind", o.bind, "Address of a running service");
  snap->add_option("--out", o.out, "Snapshot path (offline mode)");
  snap->add_flag("--offline", o.offline, "Do not contact a running service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (e.get_exit_code() != 0) {
      std::cerr << app.help();
      return kExitUsage;
    }
    return code;
  }

  try {
    const linr::AppConfig config = resolve(o);
    if (*gen) return cmd_gen(config);
    if (*build) return cmd_build(config, o);
    if (*serve) return cmd_serve(config);
    if (*bench) return cmd_bench(config);
    if (*quant) return cmd_quantize_eval(o, config);
    if (*snap) return cmd_snapshot(config, o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const linr::Error& e) {
    std::cerr << "error [" << linr::error_code_name(e.code()) << "]: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
