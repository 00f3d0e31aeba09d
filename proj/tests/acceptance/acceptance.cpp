// Acceptance checks. `acceptance <name>` runs one criterion, `acceptance all`
// runs every one. Each prints a single PASS/FAIL line and the process exits
// non-zero if any check failed.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "support.hpp"
#include "vsum/eval.hpp"
#include "vsum/masking.hpp"
#include "vsum/optim.hpp"
#include "vsum/pretrain.hpp"
#include "vsum/rltrain.hpp"
#include "vsum/summarize.hpp"
#include "vsum/synthetic.hpp"

using namespace vsum;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// ---------------------------------------------------------------- metrics

Outcome metrics() {
  const double tol = 1e-12;
  int bad = 0;
  auto expect = [&](double got, double want) {
    if (!(std::abs(got - want) <= tol)) ++bad;
  };
  auto expect_opt = [&](std::optional<double> got, double want) {
    if (!got) {
      ++bad;
    } else {
      expect(*got, want);
    }
  };

  const std::vector<std::uint8_t> a{1, 1, 0, 1, 0};
  const std::vector<int> a_int{1, 1, 0, 1, 0};
  const auto same = f_score(a, a_int);
  expect(same.precision, 1);
  expect(same.recall, 1);
  expect(same.f, 100);
  expect(f_score(std::vector<std::uint8_t>{1, 1, 0, 0}, std::vector<int>{0, 0, 1, 1}).f, 0);
  const auto mixed = f_score(std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 0, 0, 0, 0},
                             std::vector<int>{0, 1, 1, 1, 1, 1, 1, 0, 0, 0});
  expect(mixed.precision, 0.75);
  expect(mixed.recall, 0.5);
  expect(mixed.f, 60);

  expect(reduce_user_scores(std::vector<double>{40, 60}, Reduction::kAverage), 50);
  expect(reduce_user_scores(std::vector<double>{40, 60}, Reduction::kMaximum), 60);
  expect(reduce_user_scores(std::vector<double>{40, 50, 60, 50, 50}, Reduction::kAverage), 50);

  const std::vector<double> x4{1, 2, 3, 4};
  expect_opt(kendall_tau(x4, x4), 1);
  expect_opt(kendall_tau(x4, std::vector<double>{4, 3, 2, 1}), -1);
  expect_opt(kendall_tau(x4, std::vector<double>{1, 3, 2, 4}), 2.0 / 3.0);
  const std::vector<double> x3{1, 2, 3};
  expect_opt(spearman_rho(x3, x3), 1);
  expect_opt(spearman_rho(x3, std::vector<double>{3, 2, 1}), -1);
  expect_opt(spearman_rho(x3, std::vector<double>{2, 1, 3}), 0.5);
  const int example_failures = bad;

  Rng rng(20240611);
  int oracle_mismatch = 0;
  for (int i = 0; i < 200; ++i) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 50));
    const int lx = static_cast<int>(rng.uniform_int(1, 10)), ly = static_cast<int>(rng.uniform_int(1, 10));
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng.uniform_int(0, lx));
    for (auto& v : y) v = static_cast<double>(rng.uniform_int(0, ly));
    const double oracle = test::brute_force_tau(x, y);
    const auto got = kendall_tau(x, y);
    if (std::isnan(oracle) ? got.has_value() : (!got || *got != oracle)) ++oracle_mismatch;
  }
  return {example_failures == 0 && oracle_mismatch == 0,
          fmt("%d example mismatches, %d/200 tau oracle mismatches", example_failures, oracle_mismatch)};
}

// --------------------------------------------------------------- knapsack

Outcome knapsack() {
  Rng rng(5150);
  int value_mismatch = 0, infeasible = 0, set_mismatch = 0;
  for (int i = 0; i < 500; ++i) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 15));
    std::vector<double> values(n);
    std::vector<std::size_t> lengths(n);
    for (std::size_t k = 0; k < n; ++k) {
      // Every third instance uses quarter steps: exact in binary, so ties are real ties.
      values[k] = i % 3 == 0 ? static_cast<double>(rng.uniform_int(0, 5)) / 4.0 : rng.uniform();
      lengths[k] = static_cast<std::size_t>(rng.uniform_int(1, 40));
    }
    const auto capacity = static_cast<std::size_t>(rng.uniform_int(0, 150));
    const auto got = knapsack_select(values, lengths, capacity);
    const auto oracle = test::brute_force_knapsack(values, lengths, capacity);
    double v = 0;
    std::size_t w = 0;
    for (auto k : got) {
      v += values[k];
      w += lengths[k];
    }
    if (w > capacity) ++infeasible;
    if (v != oracle.value) ++value_mismatch;
    if (got != oracle.items) ++set_mismatch;
  }
  return {value_mismatch == 0 && infeasible == 0 && set_mismatch == 0,
          fmt("500 instances: %d value mismatches, %d infeasible, %d tie-break mismatches", value_mismatch, infeasible,
              set_mismatch)};
}

// ---------------------------------------------------------------- masking

Outcome masking() {
  const std::vector<std::vector<std::size_t>> layouts{
      {20, 28, 16, 32, 12, 20}, {8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8}, {40, 24, 40, 24},
      {10, 30, 10, 30, 10, 30, 8}, {16, 16, 16, 16, 16, 16, 16, 16}};
  std::size_t counts[3] = {0, 0, 0};
  std::size_t windows = 0;
  int boundary_violations = 0, overshoot_violations = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto& layout = layouts[s % layouts.size()];
    std::vector<std::int32_t> labels;
    for (std::size_t k = 0; k < layout.size(); ++k) labels.insert(labels.end(), layout[k], static_cast<std::int32_t>(k));
    // Some plans carry PAD tails so validity is exercised as well.
    const std::size_t pad = s % 7 == 0 ? 24 : 0;
    const std::size_t valid_len = 128 - pad;
    labels.resize(valid_len);
    labels.resize(128, kPadLabel);
    std::vector<std::uint8_t> valid(128, 0);
    std::fill(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(valid_len), 1);

    MaskingOptions o;
    o.mask_ratio = s % 2 ? 0.25 : 0.5;
    const MaskPlan plan = plan_masking(labels, valid, o, derive_seed(99, "acceptance.masking", s));
    std::vector<int> cover(128, 0);
    std::size_t total = 0, longest = 0;
    for (const auto& w : plan.candidate_windows) {
      ++counts[static_cast<int>(w.disposition)];
      ++windows;
      total += w.length;
      longest = std::max(longest, w.length);
      for (std::size_t k = 0; k < w.length; ++k) {
        const std::size_t p = w.start + k;
        if (p >= 128 || !valid[p] || labels[p] != labels[w.start] || cover[p]++) ++boundary_violations;
      }
    }
    const double threshold = o.mask_ratio * static_cast<double>(valid_len);
    const bool overshoot_ok = static_cast<double>(total) >= threshold &&
                              static_cast<double>(total - plan.candidate_windows.back().length) < threshold &&
                              static_cast<double>(total) < threshold + static_cast<double>(longest);
    if (!overshoot_ok) ++overshoot_violations;
  }
  const double n = static_cast<double>(windows);
  const double mask = counts[static_cast<int>(Disposition::kMask)] / n;
  const double replace = counts[static_cast<int>(Disposition::kReplace)] / n;
  const double keep = counts[static_cast<int>(Disposition::kKeep)] / n;
  const bool freq_ok = std::abs(mask - 0.8) <= 0.02 && std::abs(replace - 0.1) <= 0.02 && std::abs(keep - 0.1) <= 0.02;
  return {freq_ok && boundary_violations == 0 && overshoot_violations == 0,
          fmt("mask/replace/keep = %.4f/%.4f/%.4f over %zu windows; %d boundary, %d overshoot violations", mask,
              replace, keep, windows, boundary_violations, overshoot_violations)};
}

// --------------------------------------------------------------- gradient

Outcome gradient() {
  const auto cfg = test::tiny_config(8, 4, 1, 2);
  GeneratorModel<double> g(cfg, 31);
  const auto x = test::random_matrix<double>(4, 8, 41);
  const auto target = test::random_matrix<double>(4, 8, 42);
  const std::vector<std::uint8_t> valid(4, 1);
  auto loss = [&] { return reconstruction_loss(target, g.forward(x, valid), valid, LossVariant::kL1Cosine).total; };

  g.params().zero_grad();
  GeneratorTape<double> tape;
  const auto out = g.forward(x, valid, &tape);
  Matrix<double> d_out;
  reconstruction_loss(target, out, valid, LossVariant::kL1Cosine, &d_out);
  g.backward(tape, d_out);

  double worst = 0;
  std::size_t checked = 0;
  const double h = 1e-5;
  for (std::size_t p = 0; p < g.params().size(); ++p) {
    for (std::size_t i = 0; i < g.params()[p].value.size(); ++i) {
      double& v = g.params()[p].value[i];
      const double orig = v;
      v = orig + h;
      const double up = loss();
      v = orig - h;
      const double down = loss();
      v = orig;
      const double fd = (up - down) / (2 * h);
      const double an = g.params()[p].grad[i];
      // Key biases have an exactly zero gradient (softmax ignores a per-row
      // shift), where the difference quotient is pure cancellation noise of
      // about 1e-10; the floor keeps that noise from reading as an error.
      worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-5}));
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("max relative error %.3e over %zu parameters", worst, checked)};
}

// -------------------------------------------------------------- reinforce

Outcome reinforce() {
  const std::size_t L = 4;
  const auto cfg = test::tiny_config(8, L, 1, 2);
  // Teach the generator to copy kept frames on fresh random inputs. Masked
  // frames are unpredictable there, so the reward depends on every action.
  GeneratorModel<double> gen(cfg, 12);
  {
    AdamW<double> opt;
    Rng rng(derive_seed(2718, "acceptance.reinforce.warmup"));
    const std::vector<std::uint8_t> all(L, 1);
    for (int step = 0; step < 3000; ++step) {
      const auto frames = test::random_matrix<double>(L, 8, derive_seed(31, "frames", step));
      std::vector<std::uint8_t> keep(L);
      for (auto& k : keep) k = rng.bernoulli(0.5);
      const auto input = build_summary_input<double>(frames, keep, all, gen.mask_token());
      gen.params().zero_grad();
      GeneratorTape<double> tape;
      const auto out = gen.forward(input, all, &tape);
      Matrix<double> d_out;
      reconstruction_loss(frames, out, all, LossVariant::kCosine, &d_out);
      gen.backward(tape, d_out);
      opt.step(gen.params(), 3e-3);
    }
  }
  auto summ = SummarizerModel<double>::from_generator(gen, cfg, 13);
  // Scores near 0.5 maximize p(1 - p) and so the per-frame signal.
  for (auto& w : summ.params()[summ.score_weight_index()].value) w *= 0.1;

  // Cosine-only loss keeps L_rec in [0, 2L], so rewards stay well away from 0.
  const LossVariant variant = LossVariant::kCosine;

  struct Exact {
    SubSequence<double> sub;
    std::vector<double> scores, grad, sigma;
    double mean_reward = 0;
    double snr = 0;  // min over t of |grad_t| / sigma_t
  };
  // Expectation and per-episode spread of the estimator over all 2^L action
  // vectors, with the baseline at E[R].
  auto enumerate = [&](std::uint64_t frame_seed) {
    Exact ex;
    auto& sub = ex.sub;
    sub.source_video_id = "probe";
    sub.frames = test::random_matrix<double>(L, 8, frame_seed);
    for (std::size_t t = 0; t < L; ++t) sub.source_indices.push_back(static_cast<std::int64_t>(t));
    sub.shot_labels.assign(L, 0);
    sub.valid_mask.assign(L, 1);
    ex.scores = summ.forward(sub.frames, sub.valid_mask);
    std::vector<double> probs, rewards;
    std::vector<std::vector<std::uint8_t>> acts;
    for (unsigned m = 0; m < (1u << L); ++m) {
      std::vector<std::uint8_t> act(L);
      double prob = 1;
      for (std::size_t t = 0; t < L; ++t) {
        act[t] = (m >> t) & 1u;
        prob *= act[t] ? ex.scores[t] : 1 - ex.scores[t];
      }
      const auto input = build_summary_input<double>(sub.frames, act, sub.valid_mask, gen.mask_token());
      const auto rec = gen.forward(input, sub.valid_mask);
      rewards.push_back(compute_reward(reconstruction_loss(sub.frames, rec, sub.valid_mask, variant).total));
      probs.push_back(prob);
      acts.push_back(act);
      ex.mean_reward += prob * rewards.back();
    }
    ex.grad.assign(L, 0.0);
    ex.sigma.assign(L, 0.0);
    std::vector<double> second(L, 0.0);
    for (std::size_t m = 0; m < probs.size(); ++m) {
      for (std::size_t t = 0; t < L; ++t) {
        const double x = -(rewards[m] - ex.mean_reward) * (acts[m][t] - ex.scores[t]);
        ex.grad[t] += probs[m] * x;
        second[t] += probs[m] * x * x;
      }
    }
    ex.snr = 1e300;
    for (std::size_t t = 0; t < L; ++t) {
      ex.sigma[t] = std::sqrt(std::max(0.0, second[t] - ex.grad[t] * ex.grad[t]));
      ex.snr = std::min(ex.snr, std::abs(ex.grad[t]) / ex.sigma[t]);
    }
    return ex;
  };

  // Choose, from exact quantities only, the probe whose weakest coordinate is
  // best resolved, so the 2% tolerance is several standard errors wide.
  Exact probe = enumerate(100);
  for (std::uint64_t seed = 101; seed < 140; ++seed) {
    Exact c = enumerate(seed);
    if (c.snr > probe.snr) probe = std::move(c);
  }

  const std::size_t n_episodes = 100000;
  Rng rng(derive_seed(2718, "acceptance.reinforce"));
  const auto episodes = run_episodes(gen, probe.sub, std::span<const double>(probe.scores), n_episodes,
                                     probe.mean_reward, variant, rng);
  const auto mc = policy_logit_gradient<double>(probe.scores, probe.sub.valid_mask, episodes);
  double worst = 0, worst_z = 0;
  for (std::size_t t = 0; t < L; ++t) {
    const double se = probe.sigma[t] / std::sqrt(static_cast<double>(n_episodes));
    worst = std::max(worst, std::abs(mc[t] - probe.grad[t]) / std::abs(probe.grad[t]));
    worst_z = std::max(worst_z, std::abs(mc[t] - probe.grad[t]) / se);
  }
  const double tolerance_in_se = 0.02 * probe.snr * std::sqrt(static_cast<double>(n_episodes));
  return {worst <= 0.02,
          fmt("max per-coordinate relative error %.4f over %zu episodes (max |z| %.2f; 2%% = %.1f standard errors; "
              "E[R] %.4f)",
              worst, n_episodes, worst_z, tolerance_in_se, probe.mean_reward)};
}

// ---------------------------------------------------------------- overfit

template <typename T>
double fixed_mask_loss(const GeneratorModel<T>& g, const std::vector<SubSequence<T>>& subs,
                       const MaskingOptions& masking) {
  double total = 0;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto plan = plan_masking(subs[i], masking, derive_seed(1, "acceptance.eval", i));
    const auto input = apply_mask(subs[i], plan, g.mask_token());
    total += reconstruction_loss(subs[i].frames, g.forward(input, subs[i].valid_mask), subs[i].valid_mask,
                                 LossVariant::kL1Cosine)
                 .total;
  }
  return total / static_cast<double>(subs.size());
}

Outcome overfit() {
  SyntheticOptions so;
  so.videos = 1;
  so.frames = 256;
  so.dim = 16;
  so.anchor_fraction = 0.0;
  so.noise = 0.02;
  const auto video = make_planted_dataset(so).front();
  const ShotTable shots = ShotTable::from_boundaries(video.annotation.shot_boundaries, 256);
  const std::vector<LabeledVideo<double>> videos{{video.video_id, matrix_cast<double>(video.embeddings), shots}};

  const auto cfg = test::tiny_config(16, 32, 1, 2, 32);
  PretrainConfig pc;
  pc.batch_size = 4;
  pc.include_dilated = false;
  pc.shift_windows = false;
  pc.peak_lr = 3e-3;
  pc.seed = 17;
  // 256 / 32 = 8 sub-sequences, 2 steps per epoch.
  pc.epochs = 1000;
  pc.warmup_epochs = 20;
  pc.cosine_horizon_epochs = 1000;
  const std::size_t steps = pc.epochs * 2;

  const GeneratorModel<double> init(cfg, 5);
  const auto subs = decompose(videos[0].embeddings, video.video_id, shots, 32, 0, false);
  const double before = fixed_mask_loss(init, subs, pc.masking);
  const auto result = pretrain(videos, init, pc);
  const double after = fixed_mask_loss(result.final_model, subs, pc.masking);
  return {after < 0.05 * before, fmt("%zu steps: L_rec %.4f -> %.4f (%.2f%% of initial; train log %.4f -> %.4f)",
                                     steps, before, after, 100 * after / before, result.history.front().rec,
                                     result.history.back().rec)};
}

// ---------------------------------------------------------------- planted

Outcome planted() {
  SyntheticOptions so;
  so.videos = 8;
  so.frames = 256;
  so.dim = 16;
  so.anchor_fraction = 0.2;
  const auto data = make_planted_dataset(so);
  std::vector<LabeledVideo<double>> videos;
  for (const auto& v : data) {
    videos.push_back({v.video_id, matrix_cast<double>(v.embeddings),
                      ShotTable::from_boundaries(v.annotation.shot_boundaries, so.frames)});
  }
  const auto cfg = test::tiny_config(16, 32, 1, 2, 32);

  PretrainConfig pc;
  pc.batch_size = 8;
  pc.peak_lr = 3e-3;
  // A well-trained generator is what makes anchors worth keeping; short
  // pretraining leaves the ranking seed-dependent.
  pc.epochs = 1500;
  pc.warmup_epochs = 10;
  pc.cosine_horizon_epochs = 1650;
  pc.seed = 3;
  const auto pre = pretrain(videos, GeneratorModel<double>(cfg, 4), pc);

  RLConfig rc;
  rc.epochs = 150;
  rc.batch_size = 8;
  rc.episodes = 5;
  rc.lr = 1e-3;
  rc.beta = 0.01;
  rc.delta = 0.3;
  rc.seed = 6;
  auto summ = SummarizerModel<double>::from_generator(pre.final_model, cfg, 7);
  const auto rl = train_summarizer(videos, pre.final_model, std::move(summ), rc);

  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto fs = score_video(rl.final_model, videos[i].embeddings, videos[i].video_id);
    scores.insert(scores.end(), fs.scores.begin(), fs.scores.end());
    labels.insert(labels.end(), data[i].anchors.begin(), data[i].anchors.end());
  }
  const double auc = roc_auc(scores, labels).value_or(0.0);
  const double first = rl.history.front().mean_reward, last = rl.history.back().mean_reward;
  return {auc > 0.7 && last > first, fmt("anchor AUC %.4f; mean reward first epoch %.6f, final epoch %.6f (pretrain "
                                         "L_rec %.3f -> %.3f)",
                                         auc, first, last, pre.history.front().rec, pre.history.back().rec)};
}

// -------------------------------------------------------------------- kts

Outcome kts() {
  Rng rng(777);
  int boundary_mismatch = 0, objective_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 12));
    const auto cap = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    const double w = std::vector<double>{0.0, 0.05, 0.25, 1.0}[static_cast<std::size_t>(rng.uniform_int(0, 3))];
    // Piecewise-constant directions plus noise, so true change points exist.
    Matrix<double> x(n, 4, 0.0);
    std::vector<double> dir(4);
    for (std::size_t t = 0; t < n; ++t) {
      if (t == 0 || rng.bernoulli(0.3)) {
        for (auto& v : dir) v = rng.normal();
      }
      for (std::size_t c = 0; c < 4; ++c) x(t, c) = dir[c] + 0.1 * rng.normal();
    }
    const auto oracle = test::brute_force_kts(x, cap, w);
    const auto got = kts_segment(x, KtsOptions{static_cast<std::int64_t>(cap), w, true});
    if (got.shots.boundaries != oracle.boundaries) ++boundary_mismatch;
    if (std::abs(got.penalized - oracle.penalized) > 1e-9 * std::max(1.0, std::abs(oracle.penalized))) {
      ++objective_mismatch;
    }
  }
  return {boundary_mismatch == 0 && objective_mismatch == 0,
          fmt("100 sequences (T <= 12): %d segmentation mismatches, %d objective mismatches", boundary_mismatch,
              objective_mismatch)};
}

// -------------------------------------------------------- reproducibility

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool smoke_pipeline(const fs::path& root) {
  const std::string data = (root / "data").string(), manifest = (root / "data" / "manifest.json").string();
  const std::vector<std::vector<std::string>> steps{
      {"vsum", "--quiet", "synth", "--out", data, "--videos", "6", "--frames", "128", "--dim", "8", "--seed", "11"},
      {"vsum", "--quiet", "--precision", "64", "pretrain", "--manifest", manifest, "--fold", "0", "--out",
       (root / "gen").string(), "--layers", "1", "--heads", "2", "--ff", "16", "--seq-len", "16", "--epochs", "8",
       "--batch-size", "4", "--seed", "5"},
      {"vsum", "--quiet", "--precision", "64", "train", "--manifest", manifest, "--fold", "0", "--out",
       (root / "rl").string(), "--generator", (root / "gen" / "generator.ckpt").string(), "--epochs", "8",
       "--batch-size", "4", "--episodes", "3", "--seed", "5"},
      {"vsum", "--quiet", "--precision", "64", "score", "--manifest", manifest, "--summarizer",
       (root / "rl" / "summarizer.ckpt").string(), "--out", (root / "scores").string()},
      {"vsum", "--quiet", "summarize", "--scores", (root / "scores").string(), "--out", (root / "sum").string()},
      {"vsum", "--quiet", "evaluate", "--manifest", manifest, "--summaries", (root / "sum").string(), "--out",
       (root / "eval").string()},
      {"vsum", "--quiet", "report", "--scores", (root / "sum").string(), "--manifest", manifest, "--out",
       (root / "report").string()},
  };
  for (const auto& s : steps) {
    if (cli::run(s) != 0) return false;
  }
  return true;
}

Outcome reproducibility() {
  test::TempDir a("accept_repro_a"), b("accept_repro_b");
  if (!smoke_pipeline(a.path()) || !smoke_pipeline(b.path())) return {false, "smoke pipeline failed"};
  std::size_t compared = 0, differing = 0;
  // Config snapshots record each run's own output paths, so they differ by design.
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file() || entry.path().filename() == "config.resolved.ini") continue;
    const auto rel = fs::relative(entry.path(), a.path());
    ++compared;
    if (!fs::exists(b.path() / rel) || slurp(entry.path()) != slurp(b.path() / rel)) ++differing;
  }
  return {compared > 0 && differing == 0,
          fmt("%zu files (checkpoints, score CSVs, summaries, logs, reports) compared byte for byte, %zu differ",
              compared, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metrics", metrics},   {"knapsack", knapsack}, {"masking", masking},
      {"gradient", gradient}, {"reinforce", reinforce}, {"overfit", overfit},
      {"planted", planted},   {"kts", kts},           {"reproducibility", reproducibility},
  };
  const std::string which = argc > 1 ? argv[1] : "all";
  bool ran = false, ok = true;
  for (const auto& [name, fn] : criteria) {
    if (which != "all" && which != name) continue;
    ran = true;
    test::Stopwatch clock;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-16s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), clock.seconds(), o.detail.c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
    return 2;
  }
  return ok ? 0 : 1;
}
