#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vsum/error.hpp"
#include "vsum/rltrain.hpp"
#include "vsum/synthetic.hpp"

using namespace vsum;
using vsum::test::random_matrix;
using vsum::test::tiny_config;

namespace {

SubSequence<double> full_sub(const Matrix<double>& frames) {
  SubSequence<double> s;
  s.source_video_id = "probe";
  s.frames = frames;
  for (std::size_t t = 0; t < frames.rows(); ++t) s.source_indices.push_back(static_cast<std::int64_t>(t));
  s.shot_labels.assign(frames.rows(), 0);
  s.valid_mask.assign(frames.rows(), 1);
  return s;
}

std::vector<LabeledVideo<double>> planted(std::size_t videos, std::size_t frames, std::size_t dim) {
  SyntheticOptions o;
  o.videos = videos;
  o.frames = frames;
  o.dim = dim;
  std::vector<LabeledVideo<double>> out;
  for (const auto& v : make_planted_dataset(o)) {
    out.push_back({v.video_id, matrix_cast<double>(v.embeddings),
                   ShotTable::from_boundaries(v.annotation.shot_boundaries, frames)});
  }
  return out;
}

}  // namespace

TEST_CASE("action sampling follows Bernoulli(p) and zeroes PAD") {
  const std::size_t len = 8;
  std::vector<std::uint8_t> valid(len, 1);
  valid[7] = 0;
  const std::vector<double> half(len, 0.5), high(len, 1.0 - 1e-3);
  Rng rng(1);
  double sum_half = 0, sum_high = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = sample_actions<double>(half, valid, rng);
    const auto b = sample_actions<double>(high, valid, rng);
    CHECK(a[7] == 0);
    CHECK(b[7] == 0);
    for (std::size_t t = 0; t < 7; ++t) {
      sum_half += a[t];
      sum_high += b[t];
    }
  }
  CHECK(std::abs(sum_half / 70000 - 0.5) < 0.02);
  CHECK(std::abs(sum_high / 70000 - (1.0 - 1e-3)) < 0.01);
  Rng r1(5), r2(5);
  CHECK(sample_actions<double>(half, valid, r1) == sample_actions<double>(half, valid, r2));
}

TEST_CASE("summary input keeps selected frames and masks the rest") {
  const auto s = random_matrix<double>(4, 3, 1);
  const std::vector<double> m{7, 7, 7};
  const std::vector<std::uint8_t> valid(4, 1);
  CHECK(build_summary_input<double>(s, std::vector<std::uint8_t>(4, 1), valid, m) == s);
  const auto none = build_summary_input<double>(s, std::vector<std::uint8_t>(4, 0), valid, m);
  for (double v : none.values()) CHECK(v == 7.0);
  const auto mixed = build_summary_input<double>(s, std::vector<std::uint8_t>{1, 0, 1, 0}, valid, m);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(mixed(0, c) == s(0, c));
    CHECK(mixed(1, c) == 7.0);
    CHECK(mixed(2, c) == s(2, c));
    CHECK(mixed(3, c) == 7.0);
  }
  CHECK_THROWS_AS(build_summary_input<double>(s, std::vector<std::uint8_t>(3, 1), valid, m), Error);
}

TEST_CASE("reward is sigmoid of the negative loss") {
  CHECK(compute_reward(0.0) == 0.5);
  CHECK(compute_reward(std::log(3.0)) == doctest::Approx(0.25).epsilon(1e-12));
  double prev = 1.0;
  for (double l = 0; l < 50; l += 0.5) {
    const double r = compute_reward(l);
    CHECK(r < prev);
    CHECK(r > 0.0);
    prev = r;
  }
}

TEST_CASE("regularization loss examples") {
  const std::vector<std::uint8_t> v4(4, 1), v2(2, 1);
  CHECK(regularization_loss<double>(std::vector<double>(4, 0.5), v4, 0.5) == 0.0);
  CHECK(regularization_loss<double>(std::vector<double>(4, 0.9), v4, 0.5) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(regularization_loss<double>(std::vector<double>{0.2, 0.8}, v2, 0.5) == doctest::Approx(0.0).scale(1.0));
  CHECK(regularization_loss<double>(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}, 0.5) ==
        doctest::Approx(0.4));
}

TEST_CASE("log-probability clamps extreme scores") {
  const std::vector<double> p{0.0, 1.0};
  const std::vector<std::uint8_t> valid(2, 1);
  const double lp = log_probability<double>(p, std::vector<std::uint8_t>{1, 0}, valid);
  CHECK(std::isfinite(lp));
  CHECK(lp == doctest::Approx(2 * std::log(kLogProbClamp)));
}

TEST_CASE("an episode whose reward equals the baseline contributes nothing") {
  const std::vector<double> p{0.3, 0.6, 0.9};
  const std::vector<std::uint8_t> valid(3, 1);
  EpisodeTrace ep{{1, 0, 1}, 0.4, 0.0, 0.4};
  const auto g = policy_logit_gradient<double>(p, valid, std::span<const EpisodeTrace>(&ep, 1));
  for (double v : g) CHECK(v == 0.0);

  EpisodeTrace ep2{{1, 0, 1}, 0.6, 0.0, 0.4};
  const auto g2 = policy_logit_gradient<double>(p, valid, std::span<const EpisodeTrace>(&ep2, 1));
  CHECK(g2[0] == doctest::Approx(-0.2 * (1 - 0.3)));
  CHECK(g2[1] == doctest::Approx(-0.2 * (0 - 0.6)));
}

TEST_CASE("regularizer gradient pushes the mean toward delta") {
  const std::vector<double> p{0.8, 0.9};
  const auto g = regularization_logit_gradient<double>(p, std::vector<std::uint8_t>(2, 1), 0.5);
  CHECK(g[0] == doctest::Approx(0.8 * 0.2 / 2));
  CHECK(g[1] == doctest::Approx(0.9 * 0.1 / 2));
}

TEST_CASE("baseline stays inside (0, 1)") {
  BaselineState b;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    b.update(rng.uniform() * 0.999 + 1e-6);
    CHECK(b.value > 0.0);
    CHECK(b.value < 1.0);
  }
}

TEST_CASE("a dominant regularizer drives the mean score to delta") {
  const auto cfg = tiny_config(8, 8, 1, 2);
  GeneratorModel<double> gen(cfg, 1);
  auto summ = SummarizerModel<double>::from_generator(gen, cfg, 2);
  auto& w = summ.params()[summ.score_weight_index()].value;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.0;
  w[0] = 3.0;  // start far from 0.5 on most frames
  const auto sub = full_sub(random_matrix<double>(8, 8, 3));
  const SubSequence<double>* batch[] = {&sub};
  RLConfig rc;
  rc.beta = 1e6;
  rc.lr = 1e-2;
  rc.delta = 0.5;
  BaselineState b;
  AdamW<double> opt;
  for (int step = 0; step < 300; ++step) policy_update<double>(summ, gen, batch, rc, b, opt, step);
  const auto p = summ.forward(sub.frames, sub.valid_mask);
  double mean = 0;
  for (double v : p) mean += v / 8;
  CHECK(std::abs(mean - 0.5) < 0.05);
}

TEST_CASE("train_summarizer: zero epochs, determinism, frozen generator") {
  const auto videos = planted(2, 64, 8);
  const auto cfg = tiny_config(8, 16, 1, 2);
  GeneratorModel<double> gen(cfg, 1);
  const auto init = SummarizerModel<double>::from_generator(gen, cfg, 2);
  RLConfig rc;
  rc.epochs = 0;
  const auto zero = train_summarizer(videos, gen, init, rc);
  CHECK(zero.history.empty());
  CHECK(zero.final_model.params().hash() == init.params().hash());

  rc.epochs = 3;
  rc.lr = 1e-3;
  rc.seed = 8;
  const auto a = train_summarizer(videos, gen, init, rc);
  const auto b = train_summarizer(videos, gen, init, rc);
  REQUIRE(a.history.size() == 3);
  CHECK(a.final_model.params().hash() == b.final_model.params().hash());
  CHECK(a.history.back().mean_reward == b.history.back().mean_reward);
  CHECK(a.final_model.params().hash() != init.params().hash());
  for (const auto& h : a.history) {
    CHECK(h.baseline > 0.0);
    CHECK(h.baseline < 1.0);
  }

  GeneratorModel<double> mutable_gen = gen;
  try {
    train_summarizer(videos, mutable_gen, init, rc, [&](const RLEpochLog&) { mutable_gen.params()[0].value[0] += 1; });
    FAIL("expected FrozenModelViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFrozenModelViolation);
  }
  CHECK_THROWS_AS(train_summarizer<double>({}, gen, init, rc), Error);
}
