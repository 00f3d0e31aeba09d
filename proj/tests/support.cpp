#include "support.hpp"

#include <unistd.h>

#include <algorithm>

namespace vsum::test {

long TempDir::getpid_portable() { return static_cast<long>(::getpid()); }

namespace {

double scatter_direct(const Matrix<double>& x, std::size_t s, std::size_t e) {
  double diag = 0, block = 0;
  for (std::size_t i = s; i < e; ++i) {
    for (std::size_t j = s; j < e; ++j) {
      double k = 0;
      for (std::size_t c = 0; c < x.cols(); ++c) k += x(i, c) * x(j, c);
      block += k;
      if (i == j) diag += k;
    }
  }
  return diag - block / static_cast<double>(e - s);
}

}  // namespace

BruteKts brute_force_kts(const Matrix<double>& raw, std::size_t max_cp, double penalty_weight) {
  Matrix<double> x = raw;
  for (std::size_t t = 0; t < x.rows(); ++t) {
    double n = 0;
    for (double v : x.row(t)) n += v * v;
    n = std::sqrt(n);
    if (n > 1e-12) {
      for (double& v : x.row(t)) v /= n;
    }
  }
  const std::size_t n = x.rows();
  BruteKts best;
  // Bit i of mask set means a change point at frame i + 1.
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    const auto m = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (m > max_cp) continue;
    std::vector<std::size_t> b{0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (mask >> i & 1) b.push_back(i + 1);
    }
    double total = 0;
    for (std::size_t k = 0; k < b.size(); ++k) total += scatter_direct(x, b[k], k + 1 < b.size() ? b[k + 1] : n);
    if (m > 0) {
      total += penalty_weight * static_cast<double>(m) *
               (std::log(static_cast<double>(n) / static_cast<double>(m)) + 1.0);
    }
    if (total < best.penalized) {
      best.penalized = total;
      best.boundaries = b;
    }
  }
  return best;
}

BruteKnapsack brute_force_knapsack(const std::vector<double>& values, const std::vector<std::size_t>& lengths,
                                   std::size_t capacity) {
  const std::size_t n = values.size();
  BruteKnapsack best;
  bool have = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::size_t w = 0;
    double v = 0;
    std::vector<std::size_t> items;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        w += lengths[i];
        v += values[i];
        items.push_back(i);
      }
    }
    if (w > capacity) continue;
    if (!have || v > best.value || (v == best.value && items < best.items)) {
      best = {items, v};
      have = true;
    }
  }
  return best;
}

PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx != 0) ++c.untied_x;
      if (dy != 0) ++c.untied_y;
      if (dx * dy > 0) ++c.concordant;
      if (dx * dy < 0) ++c.discordant;
    }
  }
  return c;
}

double brute_force_tau(const std::vector<double>& x, const std::vector<double>& y) {
  const PairCounts c = count_pairs(x, y);
  if (c.untied_x == 0 || c.untied_y == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(c.concordant - c.discordant) /
         std::sqrt(static_cast<double>(c.untied_x) * static_cast<double>(c.untied_y));
}

}  // namespace vsum::test
