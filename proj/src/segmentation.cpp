#include "vsum/segmentation.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "vsum/error.hpp"

namespace vsum {

ShotTable ShotTable::from_boundaries(std::vector<std::size_t> boundaries, std::size_t frames) {
  if (frames == 0) throw Error(ErrorCode::kDimensionMismatch, "shot table needs at least one frame");
  if (boundaries.empty() || boundaries.front() != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "shot boundaries must start at 0");
  }
  ShotTable t;
  t.boundaries = std::move(boundaries);
  t.labels.resize(frames);
  for (std::size_t s = 0; s < t.boundaries.size(); ++s) {
    const std::size_t begin = t.boundaries[s];
    const std::size_t end = s + 1 < t.boundaries.size() ? t.boundaries[s + 1] : frames;
    if (end <= begin || end > frames) {
      throw Error(ErrorCode::kDimensionMismatch, "shot boundaries must be strictly increasing and below T");
    }
    t.lengths.push_back(end - begin);
    for (std::size_t f = begin; f < end; ++f) t.labels[f] = static_cast<std::int32_t>(s);
  }
  return t;
}

std::string ShotTable::to_json(const std::string& video_id) const {
  nlohmann::json j;
  j["video_id"] = video_id;
  j["boundaries"] = boundaries;
  j["lengths"] = lengths;
  return j.dump(2);
}

template <typename T>
std::size_t SubSequence<T>::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid_mask) n += v ? 1 : 0;
  return n;
}

double kts_penalty(std::size_t change_points, std::size_t frames, double penalty_weight) {
  if (change_points == 0) return 0.0;
  const double m = static_cast<double>(change_points);
  return penalty_weight * m * (std::log(static_cast<double>(frames) / m) + 1.0);
}

template <typename T>
KtsResult kts_segment(const Matrix<T>& embeddings, const KtsOptions& options) {
  const std::size_t n = embeddings.rows();
  const std::size_t dim = embeddings.cols();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "kts_segment needs at least one frame");
  if (options.penalty_weight < 0) throw Error(ErrorCode::kInvalidArgument, "penalty_weight must be >= 0");
  const std::size_t max_cp = options.max_change_points < 0
                                 ? n / 20
                                 : static_cast<std::size_t>(options.max_change_points);
  if (max_cp >= n) throw Error(ErrorCode::kInvalidArgument, "max_change_points must be < T");

  Matrix<double> x = matrix_cast<double>(embeddings);
  if (options.normalize) {
    for (std::size_t t = 0; t < n; ++t) {
      auto r = x.row(t);
      double norm = 0;
      for (double v : r) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-12) {
        for (double& v : r) v /= norm;
      }
    }
  }

  // 2-D prefix sums of the Gram matrix and 1-D prefix sums of its diagonal,
  // so each segment's scatter is O(1).
  Matrix<double> prefix(n + 1, n + 1, 0.0);
  std::vector<double> diag(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double k = 0;
      for (std::size_t c = 0; c < dim; ++c) k += x(i, c) * x(j, c);
      if (i == j) diag[i + 1] = diag[i] + k;
      row_acc += k;
      prefix(i + 1, j + 1) = prefix(i, j + 1) + row_acc;
    }
  }
  auto scatter = [&](std::size_t s, std::size_t e) {
    const double block = prefix(e, e) - prefix(s, e) - prefix(e, s) + prefix(s, s);
    return (diag[e] - diag[s]) - block / static_cast<double>(e - s);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best(k, e): minimal scatter of [0, e) split into k + 1 segments.
  Matrix<double> best(max_cp + 1, n + 1, kInf);
  Matrix<std::size_t> arg(max_cp + 1, n + 1, 0);
  for (std::size_t e = 1; e <= n; ++e) best(0, e) = scatter(0, e);
  for (std::size_t k = 1; k <= max_cp; ++k) {
    for (std::size_t e = k + 1; e <= n; ++e) {
      double b = kInf;
      std::size_t a = 0;
      for (std::size_t s = k; s < e; ++s) {
        const double v = best(k - 1, s) + scatter(s, e);
        if (v < b) {
          b = v;
          a = s;
        }
      }
      best(k, e) = b;
      arg(k, e) = a;
    }
  }

  std::size_t chosen = 0;
  double chosen_penalized = kInf;
  for (std::size_t m = 0; m <= max_cp; ++m) {
    const double v = best(m, n) + kts_penalty(m, n, options.penalty_weight);
    if (v < chosen_penalized) {
      chosen_penalized = v;
      chosen = m;
    }
  }

  std::vector<std::size_t> boundaries(chosen + 1, 0);
  std::size_t e = n;
  for (std::size_t k = chosen; k > 0; --k) {
    e = arg(k, e);
    boundaries[k] = e;
  }
  KtsResult result;
  result.shots = ShotTable::from_boundaries(std::move(boundaries), n);
  result.objective = best(chosen, n);
  result.penalized = chosen_penalized;
  return result;
}

namespace {

template <typename T>
SubSequence<T> make_window(const Matrix<T>& embeddings, const std::string& video_id,
                           const std::vector<std::int64_t>& indices) {
  SubSequence<T> sub;
  sub.source_video_id = video_id;
  sub.frames = Matrix<T>(indices.size(), embeddings.cols(), T{0});
  sub.source_indices = indices;
  sub.shot_labels.assign(indices.size(), kPadLabel);
  sub.valid_mask.assign(indices.size(), 0);
  for (std::size_t p = 0; p < indices.size(); ++p) {
    if (indices[p] == kPadIndex) continue;
    const auto src = embeddings.row(static_cast<std::size_t>(indices[p]));
    std::copy(src.begin(), src.end(), sub.frames.row(p).begin());
    sub.valid_mask[p] = 1;
  }
  return sub;
}

void check_length(std::size_t length) {
  if (length < 2) throw Error(ErrorCode::kInvalidArgument, "sub-sequence length must be >= 2");
}

}  // namespace

template <typename T>
std::vector<SubSequence<T>> sequential_split(const Matrix<T>& embeddings, const std::string& video_id,
                                             std::size_t length, std::int64_t shift) {
  check_length(length);
  const auto len = static_cast<std::int64_t>(length);
  if (std::abs(shift) > len / 2) {
    throw Error(ErrorCode::kInvalidArgument, "shift must lie in [-L/2, L/2]");
  }
  const auto frames = static_cast<std::int64_t>(embeddings.rows());
  const std::int64_t offset = ((shift % len) + len) % len;
  const std::int64_t first = offset == 0 ? 0 : offset - len;

  std::vector<SubSequence<T>> out;
  std::vector<std::int64_t> indices(length);
  for (std::int64_t start = first; start < frames; start += len) {
    for (std::int64_t p = 0; p < len; ++p) {
      const std::int64_t src = start + p;
      indices[static_cast<std::size_t>(p)] = (src >= 0 && src < frames) ? src : kPadIndex;
    }
    out.push_back(make_window(embeddings, video_id, indices));
  }
  return out;
}

template <typename T>
std::vector<SubSequence<T>> dilated_split(const Matrix<T>& embeddings, const std::string& video_id,
                                          std::size_t length) {
  check_length(length);
  const std::size_t frames = embeddings.rows();
  const std::size_t stride = (frames + length - 1) / length;
  std::vector<SubSequence<T>> out;
  std::vector<std::int64_t> indices(length);
  for (std::size_t i = 0; i < stride; ++i) {
    for (std::size_t p = 0; p < length; ++p) {
      const std::size_t src = i + p * stride;
      indices[p] = src < frames ? static_cast<std::int64_t>(src) : kPadIndex;
    }
    out.push_back(make_window(embeddings, video_id, indices));
  }
  return out;
}

template <typename T>
void attach_shot_labels(SubSequence<T>& sub, const ShotTable& shots) {
  for (std::size_t p = 0; p < sub.length(); ++p) {
    const std::int64_t src = sub.source_indices[p];
    if (src == kPadIndex) {
      sub.shot_labels[p] = kPadLabel;
      continue;
    }
    if (src < 0 || static_cast<std::size_t>(src) >= shots.frames()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "frame " + std::to_string(src) + " outside shot table of " +
                      std::to_string(shots.frames()) + " frames");
    }
    sub.shot_labels[p] = shots.labels[static_cast<std::size_t>(src)];
  }
}

template <typename T>
std::vector<SubSequence<T>> decompose(const Matrix<T>& embeddings, const std::string& video_id,
                                      const ShotTable& shots, std::size_t length, std::int64_t shift,
                                      bool include_dilated) {
  auto subs = sequential_split(embeddings, video_id, length, shift);
  if (include_dilated) {
    auto dil = dilated_split(embeddings, video_id, length);
    for (auto& s : dil) subs.push_back(std::move(s));
  }
  for (auto& s : subs) attach_shot_labels(s, shots);
  return subs;
}

#define VSUM_INSTANTIATE(T)                                                                          \
  template struct SubSequence<T>;                                                                    \
  template KtsResult kts_segment<T>(const Matrix<T>&, const KtsOptions&);                            \
  template std::vector<SubSequence<T>> sequential_split<T>(const Matrix<T>&, const std::string&,     \
                                                           std::size_t, std::int64_t);               \
  template std::vector<SubSequence<T>> dilated_split<T>(const Matrix<T>&, const std::string&,        \
                                                        std::size_t);                                \
  template void attach_shot_labels<T>(SubSequence<T>&, const ShotTable&);                            \
  template std::vector<SubSequence<T>> decompose<T>(const Matrix<T>&, const std::string&,            \
                                                    const ShotTable&, std::size_t, std::int64_t, bool);

VSUM_INSTANTIATE(float)
VSUM_INSTANTIATE(double)
#undef VSUM_INSTANTIATE

}  // namespace vsum
