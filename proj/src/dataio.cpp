#include "vsum/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "vsum/error.hpp"

namespace vsum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace binio {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMissingFile, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kMissingFile, "write failed for " + path);
}

}  // namespace binio

namespace {

constexpr std::string_view kEmbeddingMagic = "KFE1";

json parse_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kMissingFile, path.string() + " does not exist");
  const std::string text = binio::read_file(path.string());
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

template <typename Fn>
auto with_json_errors(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  binio::write_file(path.string(), j.dump(2) + "\n");
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

std::string reduction_name(Reduction r) { return r == Reduction::kMaximum ? "maximum" : "average"; }

Reduction parse_reduction(const std::string& s) {
  if (s == "average") return Reduction::kAverage;
  if (s == "maximum") return Reduction::kMaximum;
  throw Error(ErrorCode::kParseError, "unknown reduction '" + s + "' (expected average|maximum)");
}

const VideoRecord& Dataset::at(const std::string& id) const {
  auto it = videos.find(id);
  if (it == videos.end()) throw Error(ErrorCode::kUnknownVideoId, id);
  return it->second;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(videos.size());
  for (const auto& [id, _] : videos) out.push_back(id);
  return out;
}

void write_embeddings(const fs::path& path, const Matrix<float>& data) {
  binio::Writer w;
  w.bytes(kEmbeddingMagic);
  w.u64(data.rows());
  w.u64(data.cols());
  for (float v : data.values()) w.f32(v);
  binio::write_file(path.string(), w.buffer());
}

Matrix<float> read_embeddings(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kMissingFile, path.string() + " does not exist");
  const std::string bytes = binio::read_file(path.string());
  binio::Reader r(bytes, ErrorCode::kCorruptEmbedding);
  if (r.bytes(4) != kEmbeddingMagic) {
    throw Error(ErrorCode::kCorruptEmbedding, path.string() + ": bad magic");
  }
  const std::uint64_t frames = r.u64();
  const std::uint64_t dim = r.u64();
  if (frames == 0 || dim == 0) {
    throw Error(ErrorCode::kCorruptEmbedding, path.string() + ": T and d must be positive");
  }
  if (r.remaining() / 4 / dim < frames || r.remaining() != frames * dim * 4) {
    throw Error(ErrorCode::kCorruptEmbedding, path.string() + ": payload size does not match header");
  }
  Matrix<float> out(frames, dim);
  for (float& v : out.values()) {
    v = r.f32();
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kCorruptEmbedding, path.string() + ": non-finite value");
    }
  }
  return out;
}

void write_annotation(const fs::path& path, const Annotation& a) {
  json j;
  j["video_id"] = a.video_id;
  j["user_summaries"] = a.user_summaries;
  if (!a.frame_importances.empty()) j["frame_importances"] = a.frame_importances;
  if (!a.shot_boundaries.empty()) j["shot_boundaries"] = a.shot_boundaries;
  write_json_file(path, j);
}

Annotation read_annotation(const fs::path& path) {
  const json j = parse_json_file(path);
  return with_json_errors(path, [&] {
    Annotation a;
    a.video_id = j.at("video_id").get<std::string>();
    a.user_summaries = j.at("user_summaries").get<std::vector<std::vector<int>>>();
    if (j.contains("frame_importances")) {
      a.frame_importances = j.at("frame_importances").get<std::vector<std::vector<double>>>();
    }
    if (j.contains("shot_boundaries")) {
      a.shot_boundaries = j.at("shot_boundaries").get<std::vector<std::size_t>>();
    }
    return a;
  });
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  json j;
  j["name"] = m.name;
  j["reduction"] = reduction_name(m.reduction);
  j["videos"] = json::array();
  for (const auto& v : m.videos) {
    j["videos"].push_back(
        {{"video_id", v.video_id}, {"embeddings", v.embeddings.generic_string()},
         {"annotation", v.annotation.generic_string()}});
  }
  if (!m.folds.empty()) j["folds"] = m.folds.generic_string();
  write_json_file(path, j);
}

DatasetManifest read_manifest(const fs::path& path) {
  const json j = parse_json_file(path);
  return with_json_errors(path, [&] {
    DatasetManifest m;
    m.base_dir = path.parent_path();
    m.name = j.at("name").get<std::string>();
    m.reduction = parse_reduction(j.value("reduction", std::string("average")));
    for (const auto& v : j.at("videos")) {
      m.videos.push_back({v.at("video_id").get<std::string>(),
                          v.at("embeddings").get<std::string>(),
                          v.at("annotation").get<std::string>()});
    }
    if (j.contains("folds")) m.folds = j.at("folds").get<std::string>();
    return m;
  });
}

void write_folds(const fs::path& path, const FoldSpec& spec) {
  json j;
  j["folds"] = json::array();
  for (const auto& f : spec.folds) j["folds"].push_back({{"train", f.train_ids}, {"test", f.test_ids}});
  write_json_file(path, j);
}

namespace {

VideoRecord load_video(const DatasetManifest& m, const VideoEntry& entry) {
  VideoRecord rec;
  rec.embeddings.video_id = entry.video_id;
  rec.embeddings.data = read_embeddings(resolve(m.base_dir, entry.embeddings));
  rec.annotation = read_annotation(resolve(m.base_dir, entry.annotation));
  const std::size_t frames = rec.embeddings.frames();
  const auto& a = rec.annotation;
  if (a.video_id != entry.video_id) {
    throw Error(ErrorCode::kParseError, "annotation for '" + entry.video_id +
                                            "' declares video_id '" + a.video_id + "'");
  }
  auto mismatch = [&](const std::string& what, std::size_t len) {
    return Error(ErrorCode::kDimensionMismatch,
                 entry.video_id + ": " + what + " has length " + std::to_string(len) +
                     ", expected T=" + std::to_string(frames));
  };
  for (const auto& u : a.user_summaries) {
    if (u.size() != frames) throw mismatch("user summary", u.size());
  }
  for (const auto& imp : a.frame_importances) {
    if (imp.size() != frames) throw mismatch("frame importance", imp.size());
  }
  if (!a.shot_boundaries.empty()) {
    const auto& b = a.shot_boundaries;
    bool ok = b.front() == 0;
    for (std::size_t i = 1; ok && i < b.size(); ++i) ok = b[i] > b[i - 1];
    if (!ok || b.back() >= frames) {
      throw Error(ErrorCode::kDimensionMismatch,
                  entry.video_id + ": shot_boundaries must start at 0, increase, and stay below T");
    }
  }
  return rec;
}

}  // namespace

Dataset load_dataset(const fs::path& manifest_path) {
  Dataset ds;
  ds.manifest = read_manifest(manifest_path);
  std::set<std::string> seen;
  for (const auto& v : ds.manifest.videos) {
    if (!seen.insert(v.video_id).second) throw Error(ErrorCode::kDuplicateVideoId, v.video_id);
  }
  std::vector<std::future<VideoRecord>> pending;
  pending.reserve(ds.manifest.videos.size());
  for (const auto& v : ds.manifest.videos) {
    pending.push_back(std::async(std::launch::async, [&ds, &v] { return load_video(ds.manifest, v); }));
  }
  // Futures are drained in manifest order so the first error reported is stable.
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    try {
      ds.videos.emplace(ds.manifest.videos[i].video_id, pending[i].get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return ds;
}

ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  for (const auto& [id, rec] : dataset.videos) {
    const auto& a = rec.annotation;
    VideoStats stats;
    stats.video_id = id;
    stats.frames = rec.embeddings.frames();
    stats.dim = rec.embeddings.dim();
    stats.user_summaries = a.user_summaries.size();
    stats.importance_annotations = a.frame_importances.size();
    stats.rank_metrics_available = !a.frame_importances.empty();
    report.videos.push_back(stats);

    if (a.user_summaries.empty()) report.violations.push_back({id, "no user summaries"});
    for (std::size_t u = 0; u < a.user_summaries.size(); ++u) {
      const auto& s = a.user_summaries[u];
      auto bad = std::find_if(s.begin(), s.end(), [](int v) { return v != 0 && v != 1; });
      if (bad != s.end()) {
        report.violations.push_back(
            {id, "user summary " + std::to_string(u) + " has non-binary value " +
                     std::to_string(*bad) + " at frame " + std::to_string(bad - s.begin())});
      }
    }
    for (std::size_t u = 0; u < a.frame_importances.size(); ++u) {
      const auto& s = a.frame_importances[u];
      if (std::any_of(s.begin(), s.end(), [](double v) { return !std::isfinite(v); })) {
        report.violations.push_back({id, "frame importance " + std::to_string(u) + " is not finite"});
      }
    }
    if (rec.embeddings.dim() != dataset.videos.begin()->second.embeddings.dim()) {
      report.violations.push_back({id, "embedding dimension differs from the rest of the dataset"});
    }
  }
  return report;
}

std::string ValidationReport::to_json() const {
  json j;
  j["ok"] = ok();
  j["videos"] = json::array();
  for (const auto& v : videos) {
    j["videos"].push_back({{"video_id", v.video_id},
                           {"T", v.frames},
                           {"d", v.dim},
                           {"user_summaries", v.user_summaries},
                           {"importance_annotations", v.importance_annotations},
                           {"rank_metrics_available", v.rank_metrics_available}});
  }
  j["violations"] = json::array();
  for (const auto& v : violations) j["violations"].push_back({{"video_id", v.video_id}, {"message", v.message}});
  return j.dump(2);
}

void check_folds(const FoldSpec& spec, const std::vector<std::string>& dataset_ids) {
  const std::set<std::string> known(dataset_ids.begin(), dataset_ids.end());
  if (spec.folds.empty()) throw Error(ErrorCode::kParseError, "fold file defines no folds");
  for (std::size_t k = 0; k < spec.folds.size(); ++k) {
    const auto& f = spec.folds[k];
    std::set<std::string> train, all;
    for (const auto& id : f.train_ids) {
      if (!known.contains(id)) throw Error(ErrorCode::kUnknownVideoId, id + " (fold " + std::to_string(k) + ")");
      train.insert(id);
    }
    for (const auto& id : f.test_ids) {
      if (!known.contains(id)) throw Error(ErrorCode::kUnknownVideoId, id + " (fold " + std::to_string(k) + ")");
      if (train.contains(id)) {
        throw Error(ErrorCode::kOverlappingFold, id + " is in both train and test of fold " + std::to_string(k));
      }
    }
    all = train;
    all.insert(f.test_ids.begin(), f.test_ids.end());
    if (all.size() != known.size()) {
      throw Error(ErrorCode::kIncompleteFold,
                  "fold " + std::to_string(k) + " covers " + std::to_string(all.size()) + " of " +
                      std::to_string(known.size()) + " videos");
    }
  }
}

FoldSpec load_folds(const fs::path& path, const Dataset& dataset) {
  const json j = parse_json_file(path);
  FoldSpec spec = with_json_errors(path, [&] {
    FoldSpec s;
    for (const auto& f : j.at("folds")) {
      s.folds.push_back({f.at("train").get<std::vector<std::string>>(),
                         f.at("test").get<std::vector<std::string>>()});
    }
    return s;
  });
  check_folds(spec, dataset.ids());
  return spec;
}

}  // namespace vsum
