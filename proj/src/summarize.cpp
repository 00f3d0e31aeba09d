#include "vsum/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "vsum/error.hpp"

namespace vsum {

using nlohmann::json;

FrameScores aggregate_scores(const std::string& video_id, std::size_t frames,
                             std::span<const std::vector<std::int64_t>> source_indices,
                             std::span<const std::vector<double>> sub_scores) {
  if (source_indices.size() != sub_scores.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one score list is needed per sub-sequence");
  }
  FrameScores out;
  out.video_id = video_id;
  out.scores.assign(frames, 0.0);
  out.contributions.assign(frames, 0);
  for (std::size_t j = 0; j < source_indices.size(); ++j) {
    const auto& idx = source_indices[j];
    if (idx.size() != sub_scores[j].size()) throw Error(ErrorCode::kShapeMismatch, "score list length mismatch");
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (idx[t] == kPadIndex) continue;
      if (idx[t] < 0 || static_cast<std::size_t>(idx[t]) >= frames) {
        throw Error(ErrorCode::kIndexOutOfRange, "source index " + std::to_string(idx[t]) + " outside video");
      }
      out.scores[idx[t]] += sub_scores[j][t];
      ++out.contributions[idx[t]];
    }
  }
  for (std::size_t t = 0; t < frames; ++t) {
    if (out.contributions[t] == 0) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(t) + " received no score");
    }
    out.scores[t] /= static_cast<double>(out.contributions[t]);
  }
  return out;
}

template <typename T>
FrameScores score_video(const SummarizerModel<T>& summarizer, const Matrix<T>& embeddings,
                        const std::string& video_id, bool sequential_only) {
  const std::size_t len = summarizer.config().max_len;
  auto subs = sequential_split(embeddings, video_id, len, 0);
  if (!sequential_only) {
    for (auto& s : dilated_split(embeddings, video_id, len)) subs.push_back(std::move(s));
  }
  std::vector<std::vector<std::int64_t>> indices;
  std::vector<std::vector<double>> scores;
  for (const auto& sub : subs) {
    if (sub.valid_count() == 0) continue;
    const std::vector<T> p = summarizer.forward(sub.frames, sub.valid_mask);
    indices.push_back(sub.source_indices);
    scores.emplace_back(p.begin(), p.end());
  }
  return aggregate_scores(video_id, embeddings.rows(), indices, scores);
}

std::vector<double> shot_scores(std::span<const double> scores, const ShotTable& shots) {
  if (scores.size() != shots.frames()) throw Error(ErrorCode::kLengthMismatch, "scores and shot table lengths differ");
  std::vector<double> out(shots.shot_count(), 0.0);
  for (std::size_t s = 0; s < shots.shot_count(); ++s) {
    double sum = 0;
    for (std::size_t t = shots.boundaries[s]; t < shots.shot_end(s); ++t) sum += scores[t];
    out[s] = sum / static_cast<double>(shots.lengths[s]);
  }
  return out;
}

std::size_t summary_budget(std::size_t frames, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(frames) + 1e-9));
}

std::vector<std::size_t> knapsack_select(std::span<const double> values, std::span<const std::size_t> lengths,
                                         std::size_t capacity) {
  if (values.size() != lengths.size()) throw Error(ErrorCode::kInvalidArgument, "values and lengths differ in size");
  const std::size_t n = values.size();
  for (auto w : lengths) {
    if (w == 0) throw Error(ErrorCode::kInvalidArgument, "shot lengths must be positive");
  }
  // best[i][c]: optimum over items i..n-1 with capacity c. Solving suffixes
  // lets a forward pass pick the earliest index whenever it stays optimal.
  const std::size_t width = capacity + 1;
  std::vector<double> best((n + 1) * width, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t c = 0; c <= capacity; ++c) {
      double v = best[(i + 1) * width + c];
      if (lengths[i] <= c) v = std::max(v, values[i] + best[(i + 1) * width + c - lengths[i]]);
      best[i * width + c] = v;
    }
  }
  std::vector<std::size_t> chosen;
  std::size_t c = capacity;
  for (std::size_t i = 0; i < n; ++i) {
    // A shorter list is lexicographically smaller, so stop once nothing
    // more is needed to stay optimal.
    if (best[i * width + c] <= 0.0) break;
    if (lengths[i] <= c && values[i] + best[(i + 1) * width + c - lengths[i]] >= best[(i + 1) * width + c]) {
      chosen.push_back(i);
      c -= lengths[i];
    }
  }
  return chosen;
}

SummarySelection emit_summary(const std::string& video_id, std::span<const std::size_t> selected,
                              const ShotTable& shots, std::size_t budget) {
  SummarySelection out;
  out.video_id = video_id;
  out.budget = budget;
  out.selected_shots.assign(selected.begin(), selected.end());
  out.summary.assign(shots.frames(), 0);
  for (auto s : selected) {
    if (s >= shots.shot_count()) throw Error(ErrorCode::kIndexOutOfRange, "shot " + std::to_string(s) + " unknown");
    std::fill(out.summary.begin() + static_cast<std::ptrdiff_t>(shots.boundaries[s]),
              out.summary.begin() + static_cast<std::ptrdiff_t>(shots.shot_end(s)), 1);
  }
  return out;
}

SummarySelection summarize_scores(const FrameScores& scores, const ShotTable& shots, double ratio) {
  const auto values = shot_scores(scores.scores, shots);
  const std::size_t budget = summary_budget(scores.scores.size(), ratio);
  const auto chosen = knapsack_select(values, shots.lengths, budget);
  return emit_summary(scores.video_id, chosen, shots, budget);
}

void write_scores_csv(const std::filesystem::path& path, const FrameScores& scores, const ShotTable* shots,
                      const SummarySelection* selection) {
  std::string text = "frame_index,score,shot_index,selected\n";
  char buf[96];
  for (std::size_t t = 0; t < scores.scores.size(); ++t) {
    const long long shot = shots ? static_cast<long long>(shots->labels.at(t)) : -1;
    const int sel = selection ? static_cast<int>(selection->summary.at(t)) : 0;
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%lld,%d\n", t, scores.scores[t], shot, sel);
    text += buf;
  }
  binio::write_file(path.string(), text);
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kMissingScores, path.string() + " does not exist");
  std::istringstream in(binio::read_file(path.string()));
  std::string line;
  std::getline(in, line);
  if (line.rfind("frame_index,score", 0) != 0) throw Error(ErrorCode::kParseError, path.string() + ": bad header");
  std::vector<ScoreRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ScoreRow r;
    long long shot = 0;
    int sel = 0;
    unsigned long long frame = 0;
    char tail = 0;
    double score = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lld,%d%c", &frame, &score, &shot, &sel, &tail) != 4 ||
        (sel != 0 && sel != 1)) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    r.frame = frame;
    r.score = score;
    r.shot = shot;
    r.selected = sel == 1;
    rows.push_back(r);
  }
  return rows;
}

void write_summary_json(const std::filesystem::path& path, const SummarySelection& selection) {
  json j;
  j["video_id"] = selection.video_id;
  j["budget"] = selection.budget;
  j["selected_shots"] = selection.selected_shots;
  std::string a;
  a.reserve(selection.summary.size());
  for (auto v : selection.summary) a.push_back(v ? '1' : '0');
  j["A"] = a;
  binio::write_file(path.string(), j.dump(2) + "\n");
}

SummarySelection read_summary_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kMissingOutput, path.string() + " does not exist");
  try {
    const json j = json::parse(binio::read_file(path.string()));
    SummarySelection s;
    s.video_id = j.at("video_id").get<std::string>();
    s.budget = j.at("budget").get<std::size_t>();
    s.selected_shots = j.at("selected_shots").get<std::vector<std::size_t>>();
    for (char c : j.at("A").get<std::string>()) {
      if (c != '0' && c != '1') throw Error(ErrorCode::kParseError, path.string() + ": A must be a 0/1 string");
      s.summary.push_back(c == '1');
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

template FrameScores score_video<float>(const SummarizerModel<float>&, const Matrix<float>&, const std::string&, bool);
template FrameScores score_video<double>(const SummarizerModel<double>&, const Matrix<double>&, const std::string&,
                                         bool);

}  // namespace vsum
