#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "linr/config.hpp"
#include "linr/index.hpp"

namespace linr::testing {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("linr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> random_vector(std::mt19937_64& gen, std::size_t dim) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = normal(gen);
  return v;
}

inline std::vector<float> unit_vector(std::mt19937_64& gen, std::size_t dim) {
  auto v = random_vector(gen, dim);
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& x : v) x = static_cast<float>(x * inv);
  return v;
}

inline std::vector<std::uint64_t> random_attrs(std::mt19937_64& gen, std::uint64_t universe,
                                               std::size_t max_count) {
  std::uniform_int_distribution<std::size_t> count(0, max_count);
  std::uniform_int_distribution<std::uint64_t> id(0, universe - 1);
  std::vector<std::uint64_t> out;
  const std::size_t n = count(gen);
  for (std::size_t i = 0; i < n; ++i) out.push_back(id(gen));
  normalize_attrs(out);
  return out;
}

inline IndexConfig small_config(std::size_t capacity, std::size_t dim, std::uint32_t bits = 0) {
  IndexConfig c;
  c.capacity = capacity;
  c.dim = dim;
  c.quant_bits = bits;
  c.seed = 7;
  c.clause_schema = {{"geo", Polarity::kMatch, 4}, {"seen", Polarity::kReverseMatch, 4}};
  return c;
}

}  // namespace linr::testing
