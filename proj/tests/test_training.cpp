#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sedx/evaluation.hpp"
#include "sedx/training.hpp"
#include "test_support.hpp"

using namespace sedx;

namespace {

SeasonalSpec small_spec() {
  SeasonalSpec s;
  s.ar_order = 2;
  s.period = 6;
  s.seasonal_order = 1;
  s.group_sizes = {2};
  s.horizon = 3;
  return s;
}

std::vector<WindowExample> windows_for(int length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto ts = sedx::testing::random_series(length, 1, rng);
  for (auto& v : ts.y) v *= 0.3;
  return enumerate_windows(ts, small_spec());
}

bool same_weights(SedxModel a, SedxModel b) {
  auto ta = a.tensors(), tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i)
    for (std::size_t j = 0; j < ta[i].size(); ++j)
      if (ta[i][j] != tb[i][j]) return false;
  return true;
}

}  // namespace

TEST_CASE("a single window can be fitted almost exactly") {
  auto ws = windows_for(30, 1);
  ws.resize(1);
  ModelConfig mc;
  mc.hidden = 4;
  TrainConfig tc;
  tc.batch_size = 1;
  tc.learning_rate = 0.01;
  tc.epochs = 600;
  const auto r = train(SedxModel::random(small_spec(), 1, mc, 2), ws, {}, tc);
  CHECK(r.report.train_loss.front() > 1e-2);
  CHECK(r.report.train_loss.back() < 1e-3);
  CHECK(mse_loss(forward(r.best, ws[0]).preds, ws[0].targets).loss < 1e-3);
}

TEST_CASE("fixed seeds give bit-identical runs") {
  const auto ws = windows_for(80, 3);
  const auto init = SedxModel::random(small_spec(), 1, {}, 5);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 4;
  tc.seed = 77;
  const auto a = train(init, ws, {}, tc);
  const auto b = train(init, ws, {}, tc);
  CHECK(a.report.same_numbers(b.report));
  CHECK(same_weights(a.best, b.best));
  tc.seed = 78;
  const auto c = train(init, ws, {}, tc);
  CHECK_FALSE(a.report.same_numbers(c.report));
}

TEST_CASE("zero learning rate leaves the model untouched") {
  const auto ws = windows_for(60, 4);
  const auto init = SedxModel::random(small_spec(), 1, {}, 6);
  TrainConfig tc;
  tc.learning_rate = 0;
  tc.batch_size = 7;
  tc.epochs = 3;
  const auto r = train(init, ws, {}, tc);
  CHECK(same_weights(r.last, init));
  for (double l : r.report.train_loss) CHECK(l == doctest::Approx(r.report.train_loss.front()).epsilon(1e-12));
}

TEST_CASE("batch gradient is the gradient of the mean loss") {
  const auto ws = windows_for(50, 8);
  const auto model = SedxModel::random(small_spec(), 1, {}, 9);
  std::vector<const WindowExample*> batch;
  for (const auto& w : ws) batch.push_back(&w);

  SedxModel g1 = model.zeros_like();
  const double l1 = batch_gradient(model, batch, g1, 1);
  SedxModel g3 = model.zeros_like();
  const double l3 = batch_gradient(model, batch, g3, 3);
  CHECK(l1 == doctest::Approx(l3).epsilon(1e-13));

  SedxModel manual = model.zeros_like();
  double mean = 0;
  for (const auto& w : ws) {
    const auto f = forward(model, w);
    const auto lg = mse_loss(f.preds, w.targets);
    mean += lg.loss / static_cast<double>(ws.size());
    backward(model, f, VectorXr(lg.grad / static_cast<double>(ws.size())), manual);
  }
  CHECK(l1 == doctest::Approx(mean).epsilon(1e-13));
  auto a = g1.tensors(), b = g3.tensors(), c = manual.tensors();
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      worst = std::max({worst, std::abs(a[i][j] - b[i][j]), std::abs(a[i][j] - c[i][j])});
  CHECK(worst < 1e-13);

  // Mean-loss gradient against central differences.
  SedxModel probe = model;
  auto loss = [&] {
    double s = 0;
    for (const auto& w : ws) s += sedx::testing::window_loss(probe, w);
    return s / static_cast<double>(ws.size());
  };
  CHECK(sedx::testing::finite_difference_check(probe.tensors(), g1.tensors(), loss) < 1e-4);
}

TEST_CASE("deterministic mode ignores the worker count") {
  const auto ws = windows_for(60, 10);
  const auto init = SedxModel::random(small_spec(), 1, {}, 11);
  TrainConfig tc;
  tc.batch_size = 16;
  tc.epochs = 2;
  tc.workers = 1;
  const auto a = train(init, ws, {}, tc);
  tc.workers = 4;
  const auto b = train(init, ws, {}, tc);
  CHECK(a.report.same_numbers(b.report));
  CHECK(same_weights(a.best, b.best));
  tc.deterministic = false;
  const auto c = train(init, ws, {}, tc);
  for (std::size_t e = 0; e < a.report.train_loss.size(); ++e)
    CHECK(c.report.train_loss[e] == doctest::Approx(a.report.train_loss[e]).epsilon(1e-9));
}

TEST_CASE("best checkpoint follows validation MASE") {
  std::mt19937_64 rng(12);
  auto ts = sedx::testing::random_series(160, 1, rng);
  EvalConfig ec;
  ec.test_len = 20;
  ec.val_len = 20;
  const auto prepared = prepare_series(ts, small_spec(), ec);
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch_size = 16;
  const auto r = train(SedxModel::random(small_spec(), 1, {}, 1), prepared.train_windows, prepared.validation, tc);
  REQUIRE(r.report.val_mase.size() == 6);
  const auto best = std::min_element(r.report.val_mase.begin(), r.report.val_mase.end());
  CHECK(r.report.best_epoch == best - r.report.val_mase.begin());
  CHECK(validation_scores(r.best, prepared.validation).first == *best);
}

TEST_CASE("configuration and data errors") {
  const auto ws = windows_for(40, 1);
  const auto init = SedxModel::random(small_spec(), 1, {}, 1);
  TrainConfig tc;
  tc.batch_size = 0;
  CHECK_THROWS_AS(train(init, ws, {}, tc), ConfigError);
  tc = {};
  tc.epochs = 0;
  CHECK_THROWS_AS(train(init, ws, {}, tc), ConfigError);
  CHECK_THROWS_AS(train(init, {}, {}, TrainConfig{}), ConfigError);
}

TEST_CASE("divergence is reported with its location") {
  auto ws = windows_for(40, 2);
  ws[0].targets(0) = std::numeric_limits<double>::infinity();
  TrainConfig tc;
  tc.shuffle = false;
  tc.epochs = 1;
  try {
    train(SedxModel::random(small_spec(), 1, {}, 1), ws, {}, tc);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("epoch 0, batch 0") != std::string::npos);
  }
}
