#pragma once

// Shared fixtures and brute-force oracles for the test suites. The oracles
// are deliberately naive so they share no code path with the library.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "vsum/matrix.hpp"
#include "vsum/model.hpp"
#include "vsum/rng.hpp"
#include "vsum/segmentation.hpp"

namespace vsum::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("vsum_" + tag + "_" + std::to_string(getpid_portable()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  static long getpid_portable();
  std::filesystem::path path_;
};

template <typename T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix<T> m(rows, cols, T(0));
  for (auto& v : m.values()) v = static_cast<T>(scale * rng.normal());
  return m;
}

inline EncoderConfig tiny_config(std::size_t dim, std::size_t len, std::size_t layers = 1, std::size_t heads = 2,
                                 std::size_t ff = 0) {
  EncoderConfig c;
  c.layers = layers;
  c.heads = heads;
  c.dim = dim;
  c.ff = ff ? ff : 2 * dim;
  c.max_len = len;
  return c;
}

struct BruteKts {
  std::vector<std::size_t> boundaries;
  double penalized = std::numeric_limits<double>::infinity();
};

// Exhaustive penalized segmentation over every set of at most max_cp change
// points, with the scatter computed straight from its definition.
BruteKts brute_force_kts(const Matrix<double>& x, std::size_t max_cp, double penalty_weight);

struct BruteKnapsack {
  std::vector<std::size_t> items;
  double value = 0.0;
};

// All 2^n subsets; ties keep the lexicographically smallest index list.
BruteKnapsack brute_force_knapsack(const std::vector<double>& values, const std::vector<std::size_t>& lengths,
                                   std::size_t capacity);

struct PairCounts {
  std::int64_t concordant = 0, discordant = 0, untied_x = 0, untied_y = 0;
};
PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y);
// tau-b from O(n^2) pair counting; NaN when undefined.
double brute_force_tau(const std::vector<double>& x, const std::vector<double>& y);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace vsum::test
