#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "vsum/error.hpp"
#include "vsum/pretrain.hpp"
#include "vsum/synthetic.hpp"

using namespace vsum;
using vsum::test::random_matrix;
using vsum::test::tiny_config;

namespace {

Matrix<double> rows(std::initializer_list<std::vector<double>> r) {
  Matrix<double> m(r.size(), r.begin()->size(), 0.0);
  std::size_t i = 0;
  for (const auto& row : r) {
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

std::vector<LabeledVideo<double>> one_video(std::size_t frames, std::size_t dim, std::uint64_t seed) {
  SyntheticOptions o;
  o.videos = 1;
  o.frames = frames;
  o.dim = dim;
  o.anchor_fraction = 0.0;
  o.noise = 0.02;
  o.seed = seed;
  const auto v = make_planted_dataset(o).front();
  return {{v.video_id, matrix_cast<double>(v.embeddings),
           ShotTable::from_boundaries(v.annotation.shot_boundaries, frames)}};
}

PretrainConfig quick_config(std::size_t epochs) {
  PretrainConfig c;
  c.epochs = epochs;
  c.batch_size = 8;
  c.peak_lr = 3e-3;
  c.warmup_epochs = 5;
  c.cosine_horizon_epochs = std::max(10.0, static_cast<double>(epochs) * 2);
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("loss of a perfect reconstruction is zero") {
  const auto s = random_matrix<double>(5, 4, 1);
  const std::vector<std::uint8_t> valid(5, 1);
  const auto t = reconstruction_loss(s, s, valid, LossVariant::kL1Cosine);
  CHECK(t.cosine == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(t.l1 == 0.0);
  CHECK(t.total == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonal single frame: L_CE = 1, L_L1 = 2, L_rec = 3") {
  const auto e = rows({{1, 0}}), r = rows({{0, 1}});
  const auto t = reconstruction_loss(e, r, std::vector<std::uint8_t>{1}, LossVariant::kL1Cosine);
  CHECK(t.cosine == 1.0);
  CHECK(t.l1 == 2.0);
  CHECK(t.total == 3.0);
}

TEST_CASE("antipodal reconstruction costs 2 per frame in the cosine term") {
  const auto e = random_matrix<double>(3, 4, 2);
  Matrix<double> r = e;
  for (auto& v : r.values()) v = -v;
  const auto t = reconstruction_loss(e, r, std::vector<std::uint8_t>(3, 1), LossVariant::kCosine);
  CHECK(t.cosine == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(t.total == t.cosine);
}

TEST_CASE("zero vectors count as orthogonal and carry no gradient") {
  Matrix<double> z(2, 3, 0.0), grad;
  const auto t = reconstruction_loss(z, z, std::vector<std::uint8_t>{1, 1}, LossVariant::kL1Cosine, &grad);
  CHECK(t.cosine == 2.0);
  CHECK(t.l1 == 0.0);
  for (double g : grad.values()) CHECK(g == 0.0);
}

TEST_CASE("PAD frames are excluded and an empty selection is rejected") {
  const auto e = rows({{1, 0}, {5, 5}}), r = rows({{1, 0}, {-5, 1}});
  const auto t = reconstruction_loss(e, r, std::vector<std::uint8_t>{1, 0}, LossVariant::kL1Cosine);
  CHECK(t.total == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(reconstruction_loss(e, r, std::vector<std::uint8_t>{0, 0}, LossVariant::kL1), Error);
}

TEST_CASE("MSE is the mean over frames of per-frame mean squared error") {
  const auto e = rows({{1, 0}, {0, 0}}), r = rows({{0, 0}, {2, 2}});
  const auto t = reconstruction_loss(e, r, std::vector<std::uint8_t>{1, 1}, LossVariant::kMse);
  CHECK(t.mse == doctest::Approx((0.5 + 4.0) / 2));
  CHECK(t.total == t.mse);
}

TEST_CASE("loss gradients match finite differences for every variant") {
  const auto e = random_matrix<double>(4, 5, 3), r0 = random_matrix<double>(4, 5, 4);
  const std::vector<std::uint8_t> valid{1, 1, 0, 1};
  for (auto variant : {LossVariant::kL1Cosine, LossVariant::kCosine, LossVariant::kL1, LossVariant::kMse,
                       LossVariant::kMseCosine}) {
    Matrix<double> grad;
    reconstruction_loss(e, r0, valid, variant, &grad);
    Matrix<double> r = r0;
    for (std::size_t i = 0; i < r.values().size(); ++i) {
      const double orig = r.values()[i];
      r.values()[i] = orig + 1e-6;
      const double up = reconstruction_loss(e, r, valid, variant).total;
      r.values()[i] = orig - 1e-6;
      const double down = reconstruction_loss(e, r, valid, variant).total;
      r.values()[i] = orig;
      CHECK(grad.values()[i] == doctest::Approx((up - down) / 2e-6).epsilon(1e-5));
    }
  }
}

TEST_CASE("unmasked frames still receive gradient") {
  // Without any masking the loss still covers every valid frame.
  const auto e = random_matrix<double>(6, 4, 5), r = random_matrix<double>(6, 4, 6);
  Matrix<double> grad;
  reconstruction_loss(e, r, std::vector<std::uint8_t>(6, 1), LossVariant::kL1Cosine, &grad);
  for (std::size_t t = 0; t < 6; ++t) {
    double n = 0;
    for (double g : grad.row(t)) n += std::abs(g);
    CHECK(n > 0);
  }
}

TEST_CASE("warmup-cosine schedule") {
  PretrainConfig c;
  CHECK(lr_at(50, c) == doctest::Approx(0.005));
  CHECK(lr_at(100, c) == doctest::Approx(0.01));
  CHECK(lr_at(1000, c) == 0.0);
  CHECK(lr_at(0, c) == 0.0);
  CHECK(lr_at(550, c) == doctest::Approx(0.005));
  for (double e = 100; e < 1000; e += 7) CHECK(lr_at(e + 7, c) <= lr_at(e, c));
}

TEST_CASE("config validation") {
  PretrainConfig c;
  c.warmup_epochs = 2000;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PretrainConfig{};
  c.masking.mask_ratio = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_loss_variant(loss_variant_name(LossVariant::kMseCosine)) == LossVariant::kMseCosine);
}

TEST_CASE("zero epochs return the initial model") {
  const auto videos = one_video(64, 8, 1);
  GeneratorModel<double> g(tiny_config(8, 16), 2);
  const auto r = pretrain(videos, g, quick_config(0));
  CHECK(r.history.empty());
  CHECK(r.final_model.params().hash() == g.params().hash());
  CHECK(r.best_model.params().hash() == g.params().hash());
}

TEST_CASE("empty training set and NaN inputs are rejected") {
  GeneratorModel<double> g(tiny_config(8, 16), 2);
  CHECK_THROWS_AS(pretrain<double>({}, g, quick_config(1)), Error);
  auto videos = one_video(64, 8, 1);
  videos[0].embeddings(10, 3) = std::nan("");
  try {
    pretrain(videos, g, quick_config(1));
    FAIL("expected divergence");
  } catch (const Error& e) {
    CAPTURE(std::string(e.what()));
    CHECK(e.code() == ErrorCode::kDivergenceDetected);
  }
}

TEST_CASE("training lowers the loss and is bitwise reproducible") {
  const auto videos = one_video(256, 16, 3);
  const auto cfg = tiny_config(16, 32, 2, 2, 64);
  const auto run = [&] { return pretrain(videos, GeneratorModel<double>(cfg, 4), quick_config(60)); };
  const auto a = run();
  REQUIRE(a.history.size() == 60);
  CHECK(a.history.back().rec < a.history.front().rec);
  CHECK(a.best_loss <= a.history.back().rec);
  const auto b = run();
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].rec == b.history[i].rec);
    CHECK(a.history[i].lr == b.history[i].lr);
  }
  CHECK(a.final_model.params().hash() == b.final_model.params().hash());
  CHECK(pretrain_log_row(a.history[0]).rfind("1,", 0) == 0);
}
