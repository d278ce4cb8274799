// Lag bookkeeping: turns a series plus seasonal orders into encoder/decoder
// training examples.
#pragma once

#include "sedx/numeric.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace sedx {

/// One sequence: endogenous values y(t) and an exogenous row x(t) per step.
struct TimeSeries {
  std::string id;
  std::vector<double> y;
  MatrixXr x;  // length x exo_dim; exo_dim may be zero

  TimeSeries() = default;
  TimeSeries(std::string id_, std::vector<double> y_, MatrixXr x_);
  /// Series without exogenous inputs.
  TimeSeries(std::string id_, std::vector<double> y_);

  int length() const { return static_cast<int>(y.size()); }
  int exo_dim() const { return static_cast<int>(x.cols()); }
  VectorXr exo(int t) const { return x.row(t).transpose(); }

  /// Throws ConfigError if lengths disagree, the series is empty, or any value is non-finite.
  void validate() const;
  /// Copy of the steps [begin, end).
  TimeSeries slice(int begin, int end) const;
};

/// Model orders. `group_sizes[i]` is the number of consecutive lags fed to
/// seasonal encoder i+1, ending just before the lag (i+1)*period.
/// `horizon` counts the jointly predicted steps (decoder length).
/// seasonal_order == 0 describes the plain encoder-decoder with no seasonal structure.
struct SeasonalSpec {
  int ar_order = 1;
  int period = 2;
  int seasonal_order = 1;
  std::vector<int> group_sizes{1};
  int horizon = 1;

  void validate() const;
  /// Smallest anchor with all history available.
  int first_anchor() const;
  /// Same orders with the seasonal structure removed.
  SeasonalSpec without_seasonal() const;

  bool operator==(const SeasonalSpec&) const = default;
};

/// Inputs and targets for one forecast origin (`anchor` = index of the first target).
struct WindowExample {
  std::vector<std::vector<VectorXr>> encoder_inputs;  // [encoder][step], oldest first
  std::vector<VectorXr> decoder_inputs;               // [step]
  VectorXr targets;                                   // horizon values; empty for forecasts
  int anchor = 0;
};

class WindowRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ExogenousHorizonError : public WindowRangeError {
 public:
  using WindowRangeError::WindowRangeError;
};

/// Decoder input width for a spec and exogenous dimension.
int decoder_input_dim(const SeasonalSpec& spec, int exo_dim);

/// Builds the example anchored at t. Targets y(t..t+horizon-1) must exist.
WindowExample assemble_window(const TimeSeries& ts, const SeasonalSpec& spec, int t);

/// Builds a forecast example at t: future y values are not read, future
/// exogenous rows x(t..t+horizon-1) must be present when exo_dim > 0.
WindowExample assemble_forecast_window(const TimeSeries& ts, const SeasonalSpec& spec, int t);

/// Inclusive anchor range; empty when last < first.
struct AnchorRange {
  int first = 0;
  int last = -1;

  int size() const { return last >= first ? last - first + 1 : 0; }
  bool empty() const { return size() == 0; }
  /// Anchors first, first+stride, ... not exceeding last.
  std::vector<int> anchors(int stride = 1) const;

  bool operator==(const AnchorRange&) const = default;
};

/// All feasible anchors of a series: first_anchor() .. length-horizon.
AnchorRange feasible_anchors(int length, const SeasonalSpec& spec);

/// One example per feasible anchor inside `range`, stride 1.
std::vector<WindowExample> enumerate_windows(const TimeSeries& ts, const SeasonalSpec& spec,
                                             AnchorRange range);
std::vector<WindowExample> enumerate_windows(const TimeSeries& ts, const SeasonalSpec& spec);

/// Terminal holdout split. The last `test_len` points form the test region,
/// the `val_len` points before them the validation region. Each split holds
/// the anchors whose whole target range lies inside its region; training
/// anchors have all targets before the validation region.
struct DataSplit {
  AnchorRange train;
  AnchorRange validation;
  AnchorRange test;
  int validation_start = 0;  // first index of the validation region
  int test_start = 0;        // first index of the test region
};

DataSplit split_train_validation_test(int length, const SeasonalSpec& spec, int test_len, int val_len);

}  // namespace sedx
