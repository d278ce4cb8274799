#include "sedx/evaluation.hpp"

namespace sedx {

void EvalConfig::validate() const {
  if (test_len < 1) throw ConfigError("eval: test_len must be >= 1");
  if (val_len < 0) throw ConfigError("eval: val_len must be >= 0");
  if (mase_lag < 1) throw ConfigError("eval: mase_lag must be >= 1");
  if (stride < 1) throw ConfigError("eval: stride must be >= 1");
}

PreparedSeries prepare_series(const TimeSeries& raw, const SeasonalSpec& spec, const EvalConfig& ec) {
  ec.validate();
  raw.validate();
  PreparedSeries s;
  s.raw = raw;
  s.split = split_train_validation_test(raw.length(), spec, ec.test_len, ec.val_len);
  s.scale = fit_scale(raw.slice(0, s.split.test_start));
  s.scaled = apply_scale(raw, s.scale);
  s.train_windows = enumerate_windows(s.scaled, spec, s.split.train);
  if (!s.split.validation.empty()) {
    const double denom = mase_scale({raw.y.data(), static_cast<std::size_t>(s.split.validation_start)}, ec.mase_lag);
    for (auto& w : enumerate_windows(s.scaled, spec, s.split.validation))
      s.validation.push_back({std::move(w), s.scale.y, denom});
  }
  return s;
}

std::vector<WindowScore> score_windows(const TimeSeries& raw, const std::vector<int>& anchors, int horizon,
                                       int reference_end, const EvalConfig& ec, const Forecaster& forecast) {
  const std::span<const double> reference(raw.y.data(), static_cast<std::size_t>(reference_end));
  std::vector<WindowScore> out;
  for (int a : anchors) {
    EvalWindow w{forecast(a), Eigen::Map<const VectorXr>(raw.y.data() + a, horizon), reference};
    WindowScore score{raw.id, a, ec.per_step_lag ? mase_per_step_lag(w) : mase(w, ec.mase_lag), std::nullopt};
    try {
      score.mape = mape(w);
    } catch (const UndefinedMetricError&) {
    }
    out.push_back(score);
  }
  return out;
}

std::vector<WindowScore> score_test(const PreparedSeries& s, int horizon, const EvalConfig& ec,
                                    const Forecaster& forecast) {
  return score_windows(s.raw, s.split.test.anchors(ec.stride), horizon, s.split.test_start, ec, forecast);
}

Forecaster network_forecaster(const SedxModel& model, const PreparedSeries& s) {
  return [&model, &s](int anchor) { return unscale(predict_multi_step(model, s.scaled, anchor), s.scale.y); };
}

Forecaster sarx_forecaster(const SarxCoeffs& coeffs, const PreparedSeries& s, int horizon) {
  return [coeffs, &s, horizon](int anchor) {
    return unscale(predict_sarx_recursive(coeffs, s.scaled, anchor, horizon), s.scale.y);
  };
}

Forecaster copy_previous_forecaster(const PreparedSeries& s, int horizon) {
  return [&s, horizon](int anchor) { return copy_previous(s.raw, anchor, horizon); };
}

SarxCoeffs fit_sarx_prepared(const PreparedSeries& s, const SeasonalSpec& spec) {
  return fit_sarx(s.scaled, spec, {spec.first_anchor(), s.split.test_start - 1});
}

}  // namespace sedx
