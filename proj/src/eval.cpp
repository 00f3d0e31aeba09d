#include "vsum/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "vsum/error.hpp"

namespace vsum {

using nlohmann::json;

FScore f_score(std::span<const std::uint8_t> machine, std::span<const int> user) {
  if (machine.size() != user.size()) {
    throw Error(ErrorCode::kLengthMismatch, "summary lengths differ (" + std::to_string(machine.size()) + " vs " +
                                                std::to_string(user.size()) + ")");
  }
  std::size_t overlap = 0, a = 0, u = 0;
  for (std::size_t t = 0; t < machine.size(); ++t) {
    if (machine[t] > 1 || (user[t] != 0 && user[t] != 1)) {
      throw Error(ErrorCode::kInvalidArgument, "summaries must be binary");
    }
    a += machine[t];
    u += static_cast<std::size_t>(user[t]);
    overlap += machine[t] && user[t];
  }
  FScore s;
  if (a == 0 || u == 0) return s;
  s.precision = static_cast<double>(overlap) / static_cast<double>(a);
  s.recall = static_cast<double>(overlap) / static_cast<double>(u);
  if (s.precision + s.recall > 0) s.f = 200.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double reduce_user_scores(std::span<const double> values, Reduction reduction) {
  if (values.empty()) throw Error(ErrorCode::kEmptyAnnotationSet, "no user summaries to reduce");
  if (reduction == Reduction::kMaximum) return *std::max_element(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

// Counts inversions of v while merge-sorting it.
std::int64_t sort_count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                                   std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = sort_count_inversions(v, scratch, lo, mid) + sort_count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Sum of t(t-1)/2 over runs of equal values in a sorted range.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq&& equal_prev) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal_prev(i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "rank inputs differ in length");
}

}  // namespace

std::optional<double> kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const auto n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t n1 = tied_pairs(n, [&](std::size_t i) { return x[idx[i]] == x[idx[i - 1]]; });
  const std::int64_t n3 = tied_pairs(n, [&](std::size_t i) {
    return x[idx[i]] == x[idx[i - 1]] && y[idx[i]] == y[idx[i - 1]];
  });
  std::vector<double> ys(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::int64_t swaps = sort_count_inversions(ys, scratch, 0, n);
  const std::int64_t n2 = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });
  const std::int64_t ax = n0 - n1, ay = n0 - n2;
  if (ax == 0 || ay == 0) return std::nullopt;
  const std::int64_t numerator = n0 - n1 - n2 + n3 - 2 * swaps;
  const double tau = static_cast<double>(numerator) / std::sqrt(static_cast<double>(ax) * static_cast<double>(ay));
  return std::clamp(tau, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[idx[j]] == values[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 1);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rx[i] - mean, b = ry[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  const auto ranks = average_ranks(scores);
  double pos_rank_sum = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) {
      pos_rank_sum += ranks[i];
      ++pos;
    }
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const double np = static_cast<double>(pos);
  return (pos_rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(neg));
}

VideoEval evaluate_video(const std::string& video_id, std::span<const std::uint8_t> summary,
                         std::span<const double> frame_scores, const Annotation& annotation, Reduction reduction) {
  VideoEval out;
  out.video_id = video_id;
  std::vector<FScore> users;
  std::vector<double> fs;
  for (const auto& u : annotation.user_summaries) {
    users.push_back(f_score(summary, u));
    fs.push_back(users.back().f);
  }
  out.score.f = reduce_user_scores(fs, reduction);
  if (reduction == Reduction::kMaximum) {
    out.score = *std::max_element(users.begin(), users.end(), [](const FScore& a, const FScore& b) { return a.f < b.f; });
  } else {
    for (const auto& s : users) {
      out.score.precision += s.precision / static_cast<double>(users.size());
      out.score.recall += s.recall / static_cast<double>(users.size());
    }
  }

  double tau_sum = 0, rho_sum = 0;
  std::size_t tau_n = 0, rho_n = 0;
  for (const auto& imp : annotation.frame_importances) {
    if (imp.size() != frame_scores.size()) {
      throw Error(ErrorCode::kLengthMismatch, video_id + ": importance length differs from score length");
    }
    if (auto t = kendall_tau(frame_scores, imp)) {
      tau_sum += *t;
      ++tau_n;
    }
    if (auto r = spearman_rho(frame_scores, imp)) {
      rho_sum += *r;
      ++rho_n;
    }
  }
  if (tau_n) out.tau = tau_sum / static_cast<double>(tau_n);
  if (rho_n) out.rho = rho_sum / static_cast<double>(rho_n);
  return out;
}

namespace {

struct OptionalMean {
  double sum = 0;
  std::size_t n = 0;
  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> get() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_csv(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

}  // namespace

EvalReport evaluate_dataset(const std::map<std::string, VideoOutput>& outputs, const Dataset& dataset,
                            const FoldSpec& folds, Reduction reduction) {
  EvalReport report;
  report.dataset = dataset.manifest.name;
  report.reduction = reduction;
  OptionalMean f_all, tau_all, rho_all;
  for (std::size_t k = 0; k < folds.folds.size(); ++k) {
    FoldEval fold;
    fold.fold = k;
    OptionalMean f, tau, rho;
    for (const auto& id : folds.folds[k].test_ids) {
      const auto it = outputs.find(id);
      if (it == outputs.end()) throw Error(ErrorCode::kMissingOutput, "no model output for test video '" + id + "'");
      VideoEval v = evaluate_video(id, it->second.summary, it->second.scores, dataset.at(id).annotation, reduction);
      v.fold = k;
      f.add(v.score.f);
      tau.add(v.tau);
      rho.add(v.rho);
      report.videos.push_back(std::move(v));
    }
    fold.videos = f.n;
    fold.f = f.get().value_or(0.0);
    fold.tau = tau.get();
    fold.rho = rho.get();
    f_all.add(fold.f);
    tau_all.add(fold.tau);
    rho_all.add(fold.rho);
    report.folds.push_back(fold);
  }
  report.f = f_all.get().value_or(0.0);
  report.tau = tau_all.get();
  report.rho = rho_all.get();
  return report;
}

std::string EvalReport::to_csv() const {
  std::string out = "scope,fold,video_id,precision,recall,f,tau,rho\n";
  char buf[128];
  for (const auto& v : videos) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", v.score.precision, v.score.recall, v.score.f);
    out += "video," + std::to_string(v.fold) + "," + v.video_id + "," + buf + "," + optional_csv(v.tau) + "," +
           optional_csv(v.rho) + "\n";
  }
  for (const auto& f : folds) {
    std::snprintf(buf, sizeof(buf), "%.17g", f.f);
    out += "fold," + std::to_string(f.fold) + ",,,," + buf + "," + optional_csv(f.tau) + "," + optional_csv(f.rho) +
           "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.17g", f);
  out += "dataset,,,,," + std::string(buf) + "," + optional_csv(tau) + "," + optional_csv(rho) + "\n";
  return out;
}

std::string EvalReport::to_json() const {
  json j;
  j["dataset"] = dataset;
  j["reduction"] = reduction_name(reduction);
  j["f"] = f;
  j["tau"] = optional_json(tau);
  j["rho"] = optional_json(rho);
  j["folds"] = json::array();
  for (const auto& fd : folds) {
    j["folds"].push_back({{"fold", fd.fold}, {"videos", fd.videos}, {"f", fd.f}, {"tau", optional_json(fd.tau)},
                          {"rho", optional_json(fd.rho)}});
  }
  j["videos"] = json::array();
  for (const auto& v : videos) {
    j["videos"].push_back({{"video_id", v.video_id},
                           {"fold", v.fold},
                           {"precision", v.score.precision},
                           {"recall", v.score.recall},
                           {"f", v.score.f},
                           {"tau", optional_json(v.tau)},
                           {"rho", optional_json(v.rho)}});
  }
  return j.dump(2) + "\n";
}

}  // namespace vsum
