// Single-sequence pipeline: holdout split, scaling, window extraction and
// scoring of forecasters on the test region.
#pragma once

#include "sedx/baselines.hpp"
#include "sedx/metrics.hpp"
#include "sedx/model.hpp"
#include "sedx/scaling.hpp"
#include "sedx/training.hpp"

#include <functional>
#include <vector>

namespace sedx {

struct EvalConfig {
  int test_len = 0;
  int val_len = 0;
  int mase_lag = 1;           // lag of the copy-previous denominator
  bool per_step_lag = false;  // scale step i by the lag-i copy-previous error instead
  int stride = 1;             // distance between evaluated anchors
  Metric metric = Metric::Mase;

  void validate() const;
};

/// A series prepared for one spec: scale fitted on everything before the
/// test region, training and validation windows in the scaled domain.
struct PreparedSeries {
  TimeSeries raw;
  TimeSeries scaled;
  ScaleParams scale;
  DataSplit split;
  std::vector<WindowExample> train_windows;
  std::vector<ValidationWindow> validation;
};

PreparedSeries prepare_series(const TimeSeries& raw, const SeasonalSpec& spec, const EvalConfig& ec);

/// Forecast in the original domain for an anchor.
using Forecaster = std::function<VectorXr(int anchor)>;

/// Scores `forecast` at each anchor against the raw series; the MASE
/// denominator comes from raw y[0, reference_end).
std::vector<WindowScore> score_windows(const TimeSeries& raw, const std::vector<int>& anchors, int horizon,
                                       int reference_end, const EvalConfig& ec, const Forecaster& forecast);

/// Scores the test anchors of a prepared series (stride from `ec`).
std::vector<WindowScore> score_test(const PreparedSeries& s, int horizon, const EvalConfig& ec,
                                    const Forecaster& forecast);

/// Network forecaster; `model` and `s` must outlive the returned function.
Forecaster network_forecaster(const SedxModel& model, const PreparedSeries& s);
/// Recursive SARX forecaster for coefficients fitted on the scaled series.
Forecaster sarx_forecaster(const SarxCoeffs& coeffs, const PreparedSeries& s, int horizon);
Forecaster copy_previous_forecaster(const PreparedSeries& s, int horizon);

/// SARX fitted on the scaled series using every target before the test region.
SarxCoeffs fit_sarx_prepared(const PreparedSeries& s, const SeasonalSpec& spec);

}  // namespace sedx
