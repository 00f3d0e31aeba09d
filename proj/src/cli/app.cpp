#include "app.hpp"

#include <cstdio>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "binary_io.hpp"
#include "config.hpp"
#include "report_svg.hpp"
#include "vsum/checkpoint.hpp"
#include "vsum/error.hpp"
#include "vsum/eval.hpp"
#include "vsum/pretrain.hpp"
#include "vsum/rltrain.hpp"
#include "vsum/simd/kernels.hpp"
#include "vsum/summarize.hpp"
#include "vsum/synthetic.hpp"

namespace vsum::cli {

namespace fs = std::filesystem;

namespace {

struct ModelFlags {
  std::size_t layers = 3;
  std::size_t heads = 8;
  std::size_t ff = 0;  // 0 selects 4 * d
  std::size_t seq_len = 128;
};

struct DataFlags {
  std::string manifest;
  std::string folds;
  int fold = -1;
};

struct PretrainArgs {
  DataFlags data;
  std::string out;
  ModelFlags model;
  KtsFlags kts;
  PretrainConfig config;
  std::string masking = "dynamic";
  std::string loss = "l1+ce";
  bool sequential_only = false;
  bool no_shift = false;
};

struct TrainArgs {
  DataFlags data;
  std::string out;
  std::string generator;
  KtsFlags kts;
  RLConfig config;
  std::string loss = "l1+ce";
  bool sequential_only = false;
  bool no_shift = false;
};

struct ScoreArgs {
  DataFlags data;
  std::string out;
  std::string summarizer;
  KtsFlags kts;
  bool sequential_only = false;
};

struct SummarizeArgs {
  std::string scores;
  std::string out;
  double budget = 0.15;
};

struct EvaluateArgs {
  std::string manifest;
  std::string folds;
  std::string summaries;
  std::string out;
  std::string reduction;
};

struct ReportArgs {
  std::string scores;
  std::string manifest;
  std::string out;
};

struct DatasetArgs {
  std::string manifest;
  std::string report;
  KtsFlags kts;
};

struct SynthArgs {
  std::string out;
  std::string name = "synthetic";
  std::string reduction = "average";
  SyntheticOptions options;
};

void info(const GlobalOptions& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << "\n";
}

EncoderConfig encoder_config(const ModelFlags& m, std::size_t dim) {
  EncoderConfig c;
  c.layers = m.layers;
  c.heads = m.heads;
  c.dim = dim;
  c.ff = m.ff ? m.ff : 4 * dim;
  c.max_len = m.seq_len;
  c.validate();
  return c;
}

template <typename T>
std::vector<LabeledVideo<T>> labeled_videos(const Dataset& ds, const std::vector<std::string>& ids,
                                            const KtsFlags& kts) {
  std::vector<LabeledVideo<T>> out;
  for (const auto& id : ids) {
    const auto& rec = ds.at(id);
    out.push_back({id, matrix_cast<T>(rec.embeddings.data), shots_for(rec, kts)});
  }
  return out;
}

std::size_t dataset_dim(const Dataset& ds) {
  if (ds.videos.empty()) throw Error(ErrorCode::kEmptyTrainSet, "dataset has no videos");
  return ds.videos.begin()->second.embeddings.data.cols();
}

template <typename T>
void save_with_state(const fs::path& path, ModelCheckpoint<T> ckpt, std::uint64_t epoch, double best_loss,
                     std::uint64_t seed) {
  ckpt.epoch = epoch;
  ckpt.best_loss = best_loss;
  ckpt.rng = Rng(derive_seed(seed, "resume", epoch)).state();
  save_checkpoint(path, ckpt);
}

template <typename T>
int cmd_pretrain(const GlobalOptions& g, PretrainArgs a) {
  const Dataset ds = load_manifest_dataset(a.data.manifest);
  const auto ids = select_ids(ds, a.data.folds, a.data.fold, true);
  a.config.masking.method = parse_masking_method(a.masking);
  a.config.loss_variant = parse_loss_variant(a.loss);
  a.config.include_dilated = !a.sequential_only;
  a.config.shift_windows = !a.no_shift;
  a.config.validate();
  const auto videos = labeled_videos<T>(ds, ids, a.kts);
  const EncoderConfig ec = encoder_config(a.model, dataset_dim(ds));

  const fs::path out = a.out;
  fs::create_directories(out);
  std::string log = pretrain_log_header() + "\n";
  GeneratorModel<T> model(ec, a.config.seed);
  auto result = pretrain<T>(videos, std::move(model), a.config, [&](const PretrainEpochLog& e) {
    log += pretrain_log_row(e) + "\n";
    info(g, "pretrain " + pretrain_log_row(e));
  });
  binio::write_file((out / "pretrain_log.csv").string(), log);

  const double best = result.history.empty() ? std::numeric_limits<double>::infinity() : result.best_loss;
  save_with_state(out / "generator.ckpt", make_checkpoint(result.best_model), result.best_epoch, best, a.config.seed);
  auto last = make_checkpoint(result.final_model);
  last.optimizer = result.optimizer;
  save_with_state(out / "generator_last.ckpt", std::move(last), result.history.size(), best, a.config.seed);
  info(g, "wrote " + (out / "generator.ckpt").string());
  return kExitOk;
}

template <typename T>
int cmd_train(const GlobalOptions& g, TrainArgs a) {
  const auto ckpt = load_checkpoint<T>(a.generator);
  const GeneratorModel<T> generator = generator_from_checkpoint(ckpt);
  const Dataset ds = load_manifest_dataset(a.data.manifest);
  if (dataset_dim(ds) != generator.config().dim) {
    throw Error(ErrorCode::kDimensionMismatch, "generator width differs from the dataset's embedding width");
  }
  const auto ids = select_ids(ds, a.data.folds, a.data.fold, true);
  a.config.loss_variant = parse_loss_variant(a.loss);
  a.config.include_dilated = !a.sequential_only;
  a.config.shift_windows = !a.no_shift;
  a.config.validate();
  const auto videos = labeled_videos<T>(ds, ids, a.kts);

  const fs::path out = a.out;
  fs::create_directories(out);
  std::string log = rl_log_header() + "\n";
  auto summarizer = SummarizerModel<T>::from_generator(generator, generator.config(), a.config.seed);
  auto result = train_summarizer<T>(videos, generator, std::move(summarizer), a.config, [&](const RLEpochLog& e) {
    log += rl_log_row(e) + "\n";
    info(g, "train " + rl_log_row(e));
  });
  binio::write_file((out / "rl_log.csv").string(), log);

  const double best = result.history.empty() ? std::numeric_limits<double>::infinity() : result.best_selection_loss;
  save_with_state(out / "summarizer.ckpt", make_checkpoint(result.best_model), result.best_epoch, best,
                  a.config.seed);
  auto last = make_checkpoint(result.final_model);
  last.optimizer = result.optimizer;
  save_with_state(out / "summarizer_last.ckpt", std::move(last), result.history.size(), best, a.config.seed);
  info(g, "wrote " + (out / "summarizer.ckpt").string());
  return kExitOk;
}

template <typename T>
int cmd_score(const GlobalOptions& g, const ScoreArgs& a) {
  const auto ckpt = load_checkpoint<T>(a.summarizer);
  const SummarizerModel<T> model = summarizer_from_checkpoint(ckpt);
  const Dataset ds = load_manifest_dataset(a.data.manifest);
  const auto ids = select_ids(ds, a.data.folds, a.data.fold, false);
  const fs::path out = a.out;
  fs::create_directories(out);
  for (const auto& id : ids) {
    const auto& rec = ds.at(id);
    if (rec.embeddings.data.cols() != model.config().dim) {
      throw Error(ErrorCode::kDimensionMismatch, id + ": embedding width differs from the model's");
    }
    const FrameScores scores =
        score_video(model, matrix_cast<T>(rec.embeddings.data), id, a.sequential_only);
    const ShotTable shots = shots_for(rec, a.kts);
    write_scores_csv(out / (id + ".csv"), scores, &shots, nullptr);
  }
  info(g, "scored " + std::to_string(ids.size()) + " videos into " + out.string());
  return kExitOk;
}

// Rebuilds frame scores and the shot table from a score CSV.
std::pair<FrameScores, ShotTable> read_scored_video(const fs::path& path) {
  const auto rows = read_scores_csv(path);
  FrameScores scores;
  scores.video_id = path.stem().string();
  std::vector<std::size_t> boundaries;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].frame != t) throw Error(ErrorCode::kParseError, path.string() + ": frame indices must be 0..T-1");
    if (rows[t].shot < 0) throw Error(ErrorCode::kParseError, path.string() + ": missing shot index");
    if (t == 0 || rows[t].shot != rows[t - 1].shot) boundaries.push_back(t);
    scores.scores.push_back(rows[t].score);
    scores.contributions.push_back(1);
  }
  if (rows.empty()) throw Error(ErrorCode::kMissingScores, path.string() + " holds no frames");
  return {std::move(scores), ShotTable::from_boundaries(std::move(boundaries), rows.size())};
}

int cmd_summarize(const GlobalOptions& g, const SummarizeArgs& a) {
  const auto files = list_files(a.scores, ".csv");
  if (files.empty()) throw Error(ErrorCode::kMissingScores, "no score CSVs in '" + a.scores + "'");
  if (!(a.budget >= 0 && a.budget <= 1)) throw UsageError("--budget must lie in [0, 1]");
  const fs::path out = a.out;
  fs::create_directories(out);
  for (const auto& f : files) {
    const auto [scores, shots] = read_scored_video(f);
    const SummarySelection sel = summarize_scores(scores, shots, a.budget);
    write_summary_json(out / (scores.video_id + ".json"), sel);
    write_scores_csv(out / (scores.video_id + ".csv"), scores, &shots, &sel);
  }
  info(g, "summarized " + std::to_string(files.size()) + " videos into " + out.string());
  return kExitOk;
}

int cmd_evaluate(const GlobalOptions& g, const EvaluateArgs& a) {
  const Dataset ds = load_manifest_dataset(a.manifest);
  const FoldSpec folds = resolve_folds(ds, a.folds);
  Reduction reduction = ds.manifest.reduction;
  if (!a.reduction.empty()) {
    const Reduction requested = parse_reduction(a.reduction);
    if (requested != reduction) {
      std::cerr << "warning: --reduction " << reduction_name(requested) << " ignored; dataset '" << ds.manifest.name
                << "' is configured for " << reduction_name(reduction) << "\n";
    }
  }
  std::map<std::string, VideoOutput> outputs;
  for (const auto& fold : folds.folds) {
    for (const auto& id : fold.test_ids) {
      if (outputs.count(id)) continue;
      const fs::path csv = fs::path(a.summaries) / (id + ".csv");
      const fs::path js = fs::path(a.summaries) / (id + ".json");
      if (!fs::exists(csv) || !fs::exists(js)) {
        throw Error(ErrorCode::kMissingOutput, "no summary/scores for test video '" + id + "' in " + a.summaries);
      }
      VideoOutput o;
      for (const auto& r : read_scores_csv(csv)) o.scores.push_back(r.score);
      o.summary = read_summary_json(js).summary;
      outputs.emplace(id, std::move(o));
    }
  }
  const EvalReport report = evaluate_dataset(outputs, ds, folds, reduction);
  const fs::path out = a.out;
  fs::create_directories(out);
  binio::write_file((out / "eval.csv").string(), report.to_csv());
  binio::write_file((out / "eval.json").string(), report.to_json());
  char line[160];
  std::snprintf(line, sizeof(line), "F = %.3f (%s, %zu folds)", report.f, reduction_name(reduction).c_str(),
                report.folds.size());
  std::string msg = line;
  if (report.tau) msg += "  tau = " + std::to_string(*report.tau);
  if (report.rho) msg += "  rho = " + std::to_string(*report.rho);
  if (!g.quiet) std::cout << msg << "\n";
  return kExitOk;
}

int cmd_report(const GlobalOptions& g, const ReportArgs& a) {
  const auto files = list_files(a.scores, ".csv");
  if (files.empty()) throw Error(ErrorCode::kMissingScores, "no score CSVs in '" + a.scores + "'");
  std::optional<Dataset> ds;
  if (!a.manifest.empty()) ds = load_manifest_dataset(a.manifest);
  const fs::path out = a.out;
  fs::create_directories(out);
  for (const auto& f : files) {
    const auto rows = read_scores_csv(f);
    TraceInput in;
    in.video_id = f.stem().string();
    in.scores.title = in.video_id + ": frame scores (min-max normalized)";
    for (const auto& r : rows) {
      in.scores.values.push_back(r.score);
      in.shots.push_back(r.shot);
      in.selected.push_back(r.selected ? 1 : 0);
    }
    if (ds && ds->videos.count(in.video_id)) {
      const Annotation& ann = ds->at(in.video_id).annotation;
      TracePanel ref;
      const bool importances = !ann.frame_importances.empty();
      ref.title = importances ? "mean human importance" : "fraction of users selecting the frame";
      ref.values.assign(rows.size(), 0.0);
      const std::size_t users = importances ? ann.frame_importances.size() : ann.user_summaries.size();
      for (std::size_t u = 0; u < users; ++u) {
        for (std::size_t t = 0; t < rows.size(); ++t) {
          const double v = importances ? ann.frame_importances[u].at(t) : ann.user_summaries[u].at(t);
          ref.values[t] += v / static_cast<double>(users);
        }
      }
      if (users) in.reference = std::move(ref);
    }
    binio::write_file((out / (in.video_id + ".svg")).string(), render_trace_svg(in));
    binio::write_file((out / (in.video_id + "_trace.csv")).string(), render_trace_csv(in));
  }
  info(g, "rendered " + std::to_string(files.size()) + " traces into " + out.string());
  return kExitOk;
}

int cmd_dataset_validate(const GlobalOptions& g, const DatasetArgs& a) {
  const Dataset ds = load_manifest_dataset(a.manifest);
  const ValidationReport report = validate_dataset(ds);
  const fs::path path = a.report.empty() ? fs::path(a.manifest).parent_path() / "validation_report.json"
                                         : fs::path(a.report);
  binio::write_file(path.string(), report.to_json());
  if (report.ok()) {
    info(g, "ok: " + std::to_string(report.videos.size()) + " videos, 0 violations");
    return kExitOk;
  }
  std::cerr << report.violations.size() << " violation(s); report written to " << path.string() << "\n";
  for (const auto& v : report.violations) std::cerr << "  " << v.video_id << ": " << v.message << "\n";
  return kExitFailure;
}

int cmd_dataset_inspect(const DatasetArgs& a) {
  const Dataset ds = load_manifest_dataset(a.manifest);
  const ValidationReport report = validate_dataset(ds);
  std::printf("dataset %s (%s), %zu videos\n", ds.manifest.name.c_str(), reduction_name(ds.manifest.reduction).c_str(),
              ds.videos.size());
  std::printf("%-24s %8s %6s %6s %6s %6s\n", "video_id", "T", "d", "users", "shots", "rank");
  for (const auto& s : report.videos) {
    const ShotTable shots = shots_for(ds.at(s.video_id), a.kts);
    std::printf("%-24s %8zu %6zu %6zu %6zu %6s\n", s.video_id.c_str(), s.frames, s.dim, s.user_summaries,
                shots.shot_count(), s.rank_metrics_available ? "yes" : "no");
  }
  std::printf("%zu violation(s)\n", report.violations.size());
  return report.ok() ? kExitOk : kExitFailure;
}

int cmd_synth(const GlobalOptions& g, const SynthArgs& a) {
  const auto videos = make_planted_dataset(a.options);
  const fs::path manifest = write_synthetic_dataset(a.out, videos, a.name, parse_reduction(a.reduction));
  info(g, "wrote " + manifest.string());
  return kExitOk;
}

void add_data_flags(CLI::App* c, DataFlags& d) {
  c->add_option("--manifest", d.manifest, "Dataset manifest (JSON)")->required();
  c->add_option("--folds", d.folds, "Fold file overriding the manifest's");
  c->add_option("--fold", d.fold, "Fold index to use; -1 uses every video");
}

void add_kts_flags(CLI::App* c, KtsFlags& k) {
  c->add_option("--kts-max-cp", k.max_change_points, "KTS change-point cap; -1 selects floor(T/20)");
  c->add_option("--kts-penalty", k.penalty, "KTS penalty weight")->check(CLI::NonNegativeNumber);
}

void add_model_flags(CLI::App* c, ModelFlags& m) {
  c->add_option("--layers", m.layers, "Encoder layers")->check(CLI::PositiveNumber);
  c->add_option("--heads", m.heads, "Attention heads")->check(CLI::PositiveNumber);
  c->add_option("--ff", m.ff, "Feed-forward width; 0 selects 4*d");
  c->add_option("--seq-len", m.seq_len, "Sub-sequence length L")->check(CLI::Range(2, 1 << 20));
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Unsupervised video summarization over precomputed frame embeddings", "vsum"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Key-value configuration file; flags override it");
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--precision", g.precision, "Scalar width in bits for training and inference")
      ->check(CLI::IsMember({32, 64}));
  app.add_option("--isa", g.isa, "Kernel set: auto, scalar, avx2, neon");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  auto* dataset = app.add_subcommand("dataset", "Validate or inspect a dataset");
  dataset->require_subcommand(1);
  DatasetArgs dsa;
  auto* validate = dataset->add_subcommand("validate", "Check a dataset; exit 1 when violations exist");
  validate->add_option("--manifest", dsa.manifest, "Dataset manifest")->required();
  validate->add_option("--report", dsa.report, "Where to write the JSON report");
  auto* inspect = dataset->add_subcommand("inspect", "Print per-video statistics");
  inspect->add_option("--manifest", dsa.manifest, "Dataset manifest")->required();
  add_kts_flags(inspect, dsa.kts);

  PretrainArgs pa;
  auto* pre = app.add_subcommand("pretrain", "Self-supervised generator training");
  add_data_flags(pre, pa.data);
  pre->add_option("--out", pa.out, "Output directory")->required();
  add_model_flags(pre, pa.model);
  add_kts_flags(pre, pa.kts);
  pre->add_option("--epochs", pa.config.epochs);
  pre->add_option("--batch-size", pa.config.batch_size)->check(CLI::PositiveNumber);
  pre->add_option("--lr", pa.config.peak_lr, "Peak learning rate");
  pre->add_option("--warmup", pa.config.warmup_epochs, "Warmup epochs");
  pre->add_option("--horizon", pa.config.cosine_horizon_epochs, "Epoch at which the rate reaches zero");
  pre->add_option("--window-ratio", pa.config.masking.window_ratio, "Window length as a fraction of the shot");
  pre->add_option("--mask-ratio", pa.config.masking.mask_ratio, "Masked fraction of valid frames");
  pre->add_option("--masking", pa.masking, "dynamic, fixed, or random");
  pre->add_option("--fixed-window", pa.config.masking.fixed_window, "Window size for fixed masking");
  pre->add_option("--loss", pa.loss, "l1+ce, ce, l1, mse, or mse+ce");
  pre->add_flag("--masked-only", pa.config.masked_only, "Restrict the loss to candidate windows");
  pre->add_flag("--sequential-only", pa.sequential_only, "Skip dilated sub-sequences");
  pre->add_flag("--no-shift", pa.no_shift, "Keep the sequential window grid at offset 0");
  pre->add_option("--seed", pa.config.seed);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Reinforcement-learning summarizer training");
  add_data_flags(train, ta.data);
  train->add_option("--out", ta.out, "Output directory")->required();
  train->add_option("--generator", ta.generator, "Pretrained generator checkpoint");
  add_kts_flags(train, ta.kts);
  train->add_option("--epochs", ta.config.epochs);
  train->add_option("--batch-size", ta.config.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--episodes", ta.config.episodes)->check(CLI::PositiveNumber);
  train->add_option("--lr", ta.config.lr);
  train->add_option("--delta", ta.config.delta, "Target mean frame score");
  train->add_option("--beta", ta.config.beta, "Regularization weight");
  train->add_option("--baseline-decay", ta.config.baseline_decay);
  train->add_option("--loss", ta.loss, "Reconstruction loss used by the reward");
  train->add_flag("--sequential-only", ta.sequential_only, "Skip dilated sub-sequences");
  train->add_flag("--no-shift", ta.no_shift, "Keep the sequential window grid at offset 0");
  train->add_option("--seed", ta.config.seed);

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Per-frame importance scores");
  add_data_flags(score, sa.data);
  score->add_option("--summarizer", sa.summarizer, "Summarizer checkpoint")->required();
  score->add_option("--out", sa.out, "Directory for <video_id>.csv")->required();
  add_kts_flags(score, sa.kts);
  score->add_flag("--sequential-only", sa.sequential_only, "Score sequential windows only");

  SummarizeArgs ma;
  auto* summarize = app.add_subcommand("summarize", "Knapsack keyshot selection from score CSVs");
  summarize->add_option("--scores", ma.scores, "Directory of score CSVs")->required();
  summarize->add_option("--out", ma.out, "Output directory")->required();
  summarize->add_option("--budget", ma.budget, "Summary length as a fraction of T");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "F-score and rank correlations over folds");
  evaluate->add_option("--manifest", ea.manifest, "Dataset manifest")->required();
  evaluate->add_option("--folds", ea.folds, "Fold file overriding the manifest's");
  evaluate->add_option("--summaries", ea.summaries, "Output directory of `summarize`")->required();
  evaluate->add_option("--out", ea.out, "Directory for eval.csv and eval.json")->required();
  evaluate->add_option("--reduction", ea.reduction, "average or maximum; the manifest setting wins");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "SVG score traces");
  report->add_option("--scores", ra.scores, "Directory of score CSVs")->required();
  report->add_option("--manifest", ra.manifest, "Manifest for human annotations");
  report->add_option("--out", ra.out, "Output directory")->required();

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Write a planted-structure synthetic dataset");
  synth->add_option("--out", ya.out, "Output directory")->required();
  synth->add_option("--name", ya.name);
  synth->add_option("--reduction", ya.reduction);
  synth->add_option("--videos", ya.options.videos)->check(CLI::PositiveNumber);
  synth->add_option("--frames", ya.options.frames)->check(CLI::PositiveNumber);
  synth->add_option("--dim", ya.options.dim)->check(CLI::PositiveNumber);
  synth->add_option("--anchor-fraction", ya.options.anchor_fraction);
  synth->add_option("--prototypes", ya.options.prototypes)->check(CLI::PositiveNumber);
  synth->add_option("--noise", ya.options.noise);
  synth->add_option("--users", ya.options.users);
  synth->add_option("--seed", ya.options.seed);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g.isa != "auto") {
      const auto isa = simd::parse_isa(g.isa);
      if (!isa) throw UsageError("unknown --isa '" + g.isa + "'");
      simd::set_active_isa(*isa);
    }
    const bool wide = g.precision == 64;
    if (*validate) return cmd_dataset_validate(g, dsa);
    if (*inspect) return cmd_dataset_inspect(dsa);
    if (*pre) {
      write_config_snapshot(pa.out, g, *pre);
      return wide ? cmd_pretrain<double>(g, pa) : cmd_pretrain<float>(g, pa);
    }
    if (*train) {
      if (ta.generator.empty()) {
        throw Error(ErrorCode::kMissingCheckpoint, "train needs --generator <checkpoint> from `pretrain`");
      }
      write_config_snapshot(ta.out, g, *train);
      return wide ? cmd_train<double>(g, ta) : cmd_train<float>(g, ta);
    }
    if (*score) {
      write_config_snapshot(sa.out, g, *score);
      return wide ? cmd_score<double>(g, sa) : cmd_score<float>(g, sa);
    }
    if (*summarize) {
      write_config_snapshot(ma.out, g, *summarize);
      return cmd_summarize(g, ma);
    }
    if (*evaluate) {
      write_config_snapshot(ea.out, g, *evaluate);
      return cmd_evaluate(g, ea);
    }
    if (*report) return cmd_report(g, ra);
    if (*synth) {
      write_config_snapshot(ya.out, g, *synth);
      return cmd_synth(g, ya);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace vsum::cli
