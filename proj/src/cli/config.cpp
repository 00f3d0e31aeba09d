#include "config.hpp"

#include <algorithm>

#include <CLI11.hpp>

#include "binary_io.hpp"
#include "vsum/error.hpp"

namespace vsum::cli {

namespace fs = std::filesystem;

void write_config_snapshot(const fs::path& dir, const GlobalOptions& globals, const CLI::App& sub) {
  std::string text = "# resolved configuration\n";
  text += "precision=" + std::to_string(globals.precision) + "\n";
  text += "isa=\"" + globals.isa + "\"\n";
  text += "[" + sub.get_name() + "]\n";
  text += sub.config_to_str(true, false);
  fs::create_directories(dir);
  binio::write_file((dir / "config.resolved.ini").string(), text);
}

Dataset load_manifest_dataset(const std::string& manifest) {
  if (manifest.empty() || !fs::is_regular_file(manifest)) {
    throw UsageError("manifest '" + manifest + "' does not exist");
  }
  return load_dataset(manifest);
}

FoldSpec resolve_folds(const Dataset& dataset, const std::string& folds_path) {
  fs::path path = folds_path;
  if (path.empty()) {
    if (dataset.manifest.folds.empty()) throw UsageError("no fold file given and the manifest names none");
    path = dataset.manifest.folds.is_absolute() ? dataset.manifest.folds
                                                : dataset.manifest.base_dir / dataset.manifest.folds;
  }
  return load_folds(path, dataset);
}

std::vector<std::string> select_ids(const Dataset& dataset, const std::string& folds_path, int fold, bool train) {
  if (fold < 0) return dataset.ids();
  const FoldSpec folds = resolve_folds(dataset, folds_path);
  if (static_cast<std::size_t>(fold) >= folds.folds.size()) {
    throw UsageError("fold " + std::to_string(fold) + " out of range (" + std::to_string(folds.folds.size()) +
                     " folds)");
  }
  return train ? folds.folds[fold].train_ids : folds.folds[fold].test_ids;
}

ShotTable shots_for(const VideoRecord& record, const KtsFlags& kts) {
  const auto& data = record.embeddings.data;
  if (!record.annotation.shot_boundaries.empty()) {
    return ShotTable::from_boundaries(record.annotation.shot_boundaries, data.rows());
  }
  KtsOptions options;
  options.max_change_points = kts.max_change_points;
  options.penalty_weight = kts.penalty;
  return kts_segment(matrix_cast<double>(data), options).shots;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vsum::cli
