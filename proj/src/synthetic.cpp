#include "vsum/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vsum/error.hpp"
#include "vsum/rng.hpp"

namespace vsum {

namespace {

std::vector<float> random_unit(Rng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = static_cast<float>(rng.normal());
    norm += static_cast<double>(x) * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x / norm);
  return v;
}

}  // namespace

std::vector<SyntheticVideo> make_planted_dataset(const SyntheticOptions& o) {
  if (o.videos == 0 || o.frames == 0 || o.dim == 0 || o.prototypes == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic dataset sizes must be positive");
  }
  if (o.anchor_run_min == 0 || o.anchor_run_min > o.anchor_run_max || o.scene_min == 0 ||
      o.scene_min > o.scene_max || !(o.anchor_fraction >= 0 && o.anchor_fraction < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent synthetic dataset options");
  }
  Rng pool_rng(derive_seed(o.seed, "synthetic.pool"));
  std::vector<std::vector<float>> pool;
  for (std::size_t k = 0; k < o.prototypes; ++k) pool.push_back(random_unit(pool_rng, o.dim));

  std::vector<SyntheticVideo> out;
  for (std::size_t v = 0; v < o.videos; ++v) {
    Rng rng(derive_seed(o.seed, "synthetic.video", v));
    SyntheticVideo video;
    char id[32];
    std::snprintf(id, sizeof(id), "video_%02zu", v);
    video.video_id = id;
    video.embeddings = Matrix<float>(o.frames, o.dim, 0.0f);
    video.anchors.assign(o.frames, 0);

    std::vector<std::size_t> boundaries;
    for (std::size_t start = 0; start < o.frames;) {
      boundaries.push_back(start);
      const auto len = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(o.scene_min),
                                                                static_cast<std::int64_t>(o.scene_max)));
      const std::size_t end = std::min(o.frames, start + len);
      const auto base = random_unit(rng, o.dim);
      for (std::size_t t = start; t < end; ++t) {
        auto row = video.embeddings.row(t);
        for (std::size_t c = 0; c < o.dim; ++c) row[c] = base[c] + static_cast<float>(o.noise * rng.normal());
      }
      start = end;
    }

    // Anchor runs never touch each other, so every run is a separate event.
    const auto target = static_cast<std::size_t>(std::round(o.anchor_fraction * static_cast<double>(o.frames)));
    std::size_t planted = 0;
    for (int attempt = 0; planted < target && attempt < 100000; ++attempt) {
      const auto run = std::min<std::size_t>(
          target - planted, static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(o.anchor_run_min),
                                                                      static_cast<std::int64_t>(o.anchor_run_max))));
      const auto start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(o.frames - run)));
      const std::size_t lo = start > 0 ? start - 1 : 0;
      const std::size_t hi = std::min(o.frames, start + run + 1);
      if (std::any_of(video.anchors.begin() + static_cast<std::ptrdiff_t>(lo),
                      video.anchors.begin() + static_cast<std::ptrdiff_t>(hi), [](auto a) { return a != 0; })) {
        continue;
      }
      const auto& proto = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(o.prototypes) - 1))];
      for (std::size_t t = start; t < start + run; ++t) {
        std::copy(proto.begin(), proto.end(), video.embeddings.row(t).begin());
        video.anchors[t] = 1;
      }
      planted += run;
    }

    video.annotation.video_id = video.video_id;
    video.annotation.shot_boundaries = boundaries;
    for (std::size_t u = 0; u < o.users; ++u) {
      std::vector<int> summary(o.frames);
      std::vector<double> importance(o.frames);
      for (std::size_t t = 0; t < o.frames; ++t) {
        const bool flip = rng.bernoulli(o.user_noise);
        summary[t] = (video.anchors[t] != 0) != flip ? 1 : 0;
        importance[t] = (video.anchors[t] ? 3.0 : 1.0) + std::floor(rng.uniform() * 2.0);
      }
      video.annotation.user_summaries.push_back(std::move(summary));
      video.annotation.frame_importances.push_back(std::move(importance));
    }
    out.push_back(std::move(video));
  }
  return out;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const std::vector<SyntheticVideo>& videos, const std::string& name,
                                              Reduction reduction) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "embeddings");
  fs::create_directories(dir / "annotations");
  DatasetManifest manifest;
  manifest.name = name;
  manifest.reduction = reduction;
  for (const auto& v : videos) {
    const fs::path emb = fs::path("embeddings") / (v.video_id + ".kfe");
    const fs::path ann = fs::path("annotations") / (v.video_id + ".json");
    write_embeddings(dir / emb, v.embeddings);
    write_annotation(dir / ann, v.annotation);
    manifest.videos.push_back({v.video_id, emb, ann});
  }
  manifest.folds = "folds.json";
  FoldSpec folds;
  const std::size_t k = std::min<std::size_t>(5, videos.size());
  for (std::size_t f = 0; f < k; ++f) {
    Fold fold;
    for (std::size_t i = 0; i < videos.size(); ++i) {
      (i % k == f ? fold.test_ids : fold.train_ids).push_back(videos[i].video_id);
    }
    folds.folds.push_back(std::move(fold));
  }
  write_folds(dir / "folds.json", folds);
  write_manifest(dir / "manifest.json", manifest);
  return dir / "manifest.json";
}

}  // namespace vsum
