#include "sedx/training.hpp"

#include "sedx/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace sedx {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(learning_rate >= 0)) throw ConfigError("train: learning_rate must be >= 0");
  if (workers < 1) throw ConfigError("train: workers must be >= 1");
}

bool TrainReport::same_numbers(const TrainReport& o) const {
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i] == b[i] || (std::isnan(a[i]) && std::isnan(b[i])))) return false;
    return true;
  };
  return best_epoch == o.best_epoch && same(train_loss, o.train_loss) && same(val_mase, o.val_mase) &&
         same(val_mape, o.val_mape);
}

namespace {

double accumulate_slice(const SedxModel& model, const std::vector<const WindowExample*>& batch, std::size_t begin,
                        std::size_t end, double weight, SedxModel& grads) {
  double loss = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& w = *batch[i];
    const auto pass = forward(model, w);
    const auto lg = mse_loss<double>(pass.preds, w.targets);
    loss += lg.loss;
    backward(model, pass, VectorXr(weight * lg.grad), grads);
  }
  return loss;
}

}  // namespace

double batch_gradient(const SedxModel& model, const std::vector<const WindowExample*>& batch, SedxModel& grads,
                      int chunks) {
  if (batch.empty()) throw ConfigError("batch_gradient: empty batch");
  grads = model.zeros_like();
  const double weight = 1.0 / static_cast<double>(batch.size());
  chunks = std::clamp<int>(chunks, 1, static_cast<int>(batch.size()));
  if (chunks == 1) return accumulate_slice(model, batch, 0, batch.size(), weight, grads) * weight;

  std::vector<SedxModel> partial(chunks, model.zeros_like());
  std::vector<double> losses(chunks, 0.0);
  std::vector<std::thread> pool;
  const std::size_t per = (batch.size() + chunks - 1) / chunks;
  for (int c = 0; c < chunks; ++c) {
    const std::size_t begin = std::min(batch.size(), c * per);
    const std::size_t end = std::min(batch.size(), begin + per);
    pool.emplace_back([&, c, begin, end] { losses[c] = accumulate_slice(model, batch, begin, end, weight, partial[c]); });
  }
  for (auto& t : pool) t.join();
  double loss = 0;
  for (int c = 0; c < chunks; ++c) {
    grads.accumulate(partial[c]);
    loss += losses[c];
  }
  return loss * weight;
}

std::pair<double, double> validation_scores(const SedxModel& model, const std::vector<ValidationWindow>& val) {
  double mase_sum = 0, mape_sum = 0;
  int mape_n = 0;
  for (const auto& v : val) {
    const VectorXr pred = unscale(forward(model, v.window).preds, v.y_range);
    const VectorXr actual = unscale(v.window.targets, v.y_range);
    mase_sum += mase_with_scale(pred, actual, v.mase_scale);
    try {
      mape_sum += mape(pred, actual);
      ++mape_n;
    } catch (const UndefinedMetricError&) {
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {val.empty() ? nan : mase_sum / static_cast<double>(val.size()), mape_n > 0 ? mape_sum / mape_n : nan};
}

TrainResult train(const SedxModel& init, const std::vector<WindowExample>& windows,
                  const std::vector<ValidationWindow>& val, const TrainConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw ConfigError("train: no training windows");
  const auto started = std::chrono::steady_clock::now();

  TrainResult result{init, init, {}};
  SedxModel& model = result.last;
  RmsProp<double> opt(cfg.learning_rate);
  SedxModel grads = model.zeros_like();
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  double best_val = std::numeric_limits<double>::infinity();
  const int chunks = cfg.deterministic ? 1 : cfg.workers;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const WindowExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&windows[order[i]]);
      const double loss = batch_gradient(model, batch, grads, chunks);
      if (!std::isfinite(loss))
        throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(b));
      epoch_loss += loss * static_cast<double>(batch.size());
      opt.step(model.tensors(), grads.tensors());
    }
    result.report.train_loss.push_back(epoch_loss / static_cast<double>(windows.size()));

    if (!val.empty()) {
      const auto [vm, vp] = validation_scores(model, val);
      if (!std::isfinite(vm))
        throw DivergenceError("training diverged: non-finite validation MASE at epoch " + std::to_string(epoch));
      result.report.val_mase.push_back(vm);
      result.report.val_mape.push_back(vp);
      if (vm < best_val) {
        best_val = vm;
        result.best = model;
        result.report.best_epoch = epoch;
      }
    }
  }
  if (val.empty()) {
    result.best = model;
    result.report.best_epoch = cfg.epochs - 1;
  }
  result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace sedx
