#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vsum/dataio.hpp"
#include "vsum/segmentation.hpp"

namespace CLI {
class App;
}

namespace vsum::cli {

// Raised for bad invocations; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  int precision = 32;
  std::string isa = "auto";
  bool quiet = false;
};

// Writes <dir>/config.resolved.ini: global options followed by the
// subcommand's section with every value (defaults included). The file can be
// passed back through --config to repeat the run.
void write_config_snapshot(const std::filesystem::path& dir, const GlobalOptions& globals, const CLI::App& sub);

// Loads the manifest; a missing manifest file is a usage error.
Dataset load_manifest_dataset(const std::string& manifest);

// Fold file from --folds, else the manifest's own fold file.
FoldSpec resolve_folds(const Dataset& dataset, const std::string& folds_path);

// Ids of fold `fold` (train or test side); all dataset ids when fold < 0.
std::vector<std::string> select_ids(const Dataset& dataset, const std::string& folds_path, int fold, bool train);

struct KtsFlags {
  std::int64_t max_change_points = -1;
  double penalty = 1.0;
};

// Annotation shot boundaries when present, otherwise KTS on the embeddings.
ShotTable shots_for(const VideoRecord& record, const KtsFlags& kts);

// Sorted regular files in `dir` with the given extension.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir, const std::string& extension);

}  // namespace vsum::cli
