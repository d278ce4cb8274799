#include "sedx/windowing.hpp"

#include <algorithm>
#include <cmath>

namespace sedx {

TimeSeries::TimeSeries(std::string id_, std::vector<double> y_, MatrixXr x_)
    : id(std::move(id_)), y(std::move(y_)), x(std::move(x_)) {}

TimeSeries::TimeSeries(std::string id_, std::vector<double> y_)
    : id(std::move(id_)), y(std::move(y_)), x(MatrixXr::Zero(static_cast<Eigen::Index>(y.size()), 0)) {}

void TimeSeries::validate() const {
  if (y.empty()) throw ConfigError("series '" + id + "' is empty");
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    throw ConfigError("series '" + id + "': exogenous rows (" + std::to_string(x.rows()) +
                      ") != length (" + std::to_string(y.size()) + ")");
  for (std::size_t t = 0; t < y.size(); ++t)
    if (!std::isfinite(y[t])) throw ConfigError("series '" + id + "': non-finite y at t=" + std::to_string(t));
  if (!x.allFinite()) throw ConfigError("series '" + id + "': non-finite exogenous value");
}

TimeSeries TimeSeries::slice(int begin, int end) const {
  return TimeSeries(id, std::vector<double>(y.begin() + begin, y.begin() + end), x.middleRows(begin, end - begin));
}

void SeasonalSpec::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("seasonal spec: " + m); };
  if (ar_order < 1) fail("ar_order must be >= 1");
  if (period < 2) fail("period must be >= 2");
  if (ar_order >= period) fail("ar_order must be smaller than period");
  if (seasonal_order < 0) fail("seasonal_order must be >= 0");
  if (static_cast<int>(group_sizes.size()) != seasonal_order)
    fail("group_sizes must have seasonal_order entries");
  for (int q : group_sizes)
    if (q < 1) fail("every group size must be >= 1");
  // A decoder step k reads y(t+k-period); beyond period-1 steps that is a future value.
  if (horizon < 1 || horizon > period) fail("horizon must lie in [1, period]");
}

int SeasonalSpec::first_anchor() const {
  int first = ar_order;
  for (int i = 1; i <= seasonal_order; ++i) first = std::max(first, i * period + group_sizes[i - 1]);
  return first;
}

SeasonalSpec SeasonalSpec::without_seasonal() const {
  SeasonalSpec s = *this;
  s.seasonal_order = 0;
  s.group_sizes.clear();
  return s;
}

int decoder_input_dim(const SeasonalSpec& spec, int exo_dim) {
  return exo_dim + spec.seasonal_order * (exo_dim + 1);
}

namespace {

VectorXr lag_pair(const TimeSeries& ts, int tau) {
  VectorXr v(ts.exo_dim() + 1);
  v.head(ts.exo_dim()) = ts.x.row(tau).transpose();
  v(ts.exo_dim()) = ts.y[tau];
  return v;
}

WindowExample build(const TimeSeries& ts, const SeasonalSpec& spec, int t) {
  const int m = ts.exo_dim();
  WindowExample w;
  w.anchor = t;

  std::vector<VectorXr> enc0;
  for (int tau = t - spec.ar_order; tau < t; ++tau) enc0.push_back(lag_pair(ts, tau));
  w.encoder_inputs.push_back(std::move(enc0));
  for (int i = 1; i <= spec.seasonal_order; ++i) {
    const int end = t - i * spec.period;
    std::vector<VectorXr> enc;
    for (int tau = end - spec.group_sizes[i - 1]; tau < end; ++tau) enc.push_back(lag_pair(ts, tau));
    w.encoder_inputs.push_back(std::move(enc));
  }

  for (int k = 0; k < spec.horizon; ++k) {
    VectorXr v(decoder_input_dim(spec, m));
    v.head(m) = ts.x.row(t + k).transpose();
    for (int i = 1; i <= spec.seasonal_order; ++i)
      v.segment(m + (i - 1) * (m + 1), m + 1) = lag_pair(ts, t + k - i * spec.period);
    w.decoder_inputs.push_back(std::move(v));
  }
  return w;
}

void check_history(const TimeSeries& ts, const SeasonalSpec& spec, int t) {
  spec.validate();
  if (t < spec.ar_order)
    throw WindowRangeError("anchor " + std::to_string(t) + " < ar_order " + std::to_string(spec.ar_order));
  for (int i = 1; i <= spec.seasonal_order; ++i) {
    const int need = i * spec.period + spec.group_sizes[i - 1];
    if (t < need)
      throw WindowRangeError("anchor " + std::to_string(t) + " < " + std::to_string(i) + "*period + group_size[" +
                             std::to_string(i - 1) + "] = " + std::to_string(need));
  }
  if (t > ts.length())
    throw WindowRangeError("anchor " + std::to_string(t) + " beyond series end " + std::to_string(ts.length()));
}

}  // namespace

WindowExample assemble_window(const TimeSeries& ts, const SeasonalSpec& spec, int t) {
  check_history(ts, spec, t);
  const int last = t + spec.horizon - 1;
  if (last > ts.length() - 1)
    throw WindowRangeError("anchor " + std::to_string(t) + " + horizon - 1 = " + std::to_string(last) +
                           " exceeds last index " + std::to_string(ts.length() - 1));
  WindowExample w = build(ts, spec, t);
  w.targets = Eigen::Map<const VectorXr>(ts.y.data() + t, spec.horizon);
  return w;
}

WindowExample assemble_forecast_window(const TimeSeries& ts, const SeasonalSpec& spec, int t) {
  check_history(ts, spec, t);
  const int last = t + spec.horizon - 1;
  if (ts.exo_dim() > 0 && last > ts.length() - 1)
    throw ExogenousHorizonError("exogenous horizon unavailable: need x up to index " + std::to_string(last) +
                                ", series ends at " + std::to_string(ts.length() - 1));
  if (ts.exo_dim() == 0 && last > ts.length() - 1) {
    // Only past y values are read; pad so the shared builder can index x rows.
    TimeSeries padded = ts;
    padded.y.resize(last + 1, 0.0);
    padded.x = MatrixXr::Zero(last + 1, 0);
    return build(padded, spec, t);
  }
  return build(ts, spec, t);
}

std::vector<int> AnchorRange::anchors(int stride) const {
  if (stride < 1) throw ConfigError("anchor stride must be >= 1");
  std::vector<int> out;
  for (int a = first; a <= last; a += stride) out.push_back(a);
  return out;
}

AnchorRange feasible_anchors(int length, const SeasonalSpec& spec) {
  spec.validate();
  return {spec.first_anchor(), length - spec.horizon};
}

std::vector<WindowExample> enumerate_windows(const TimeSeries& ts, const SeasonalSpec& spec, AnchorRange range) {
  const AnchorRange feasible = feasible_anchors(ts.length(), spec);
  const int first = std::max(range.first, feasible.first);
  const int last = std::min(range.last, feasible.last);
  std::vector<WindowExample> out;
  for (int t = first; t <= last; ++t) out.push_back(assemble_window(ts, spec, t));
  return out;
}

std::vector<WindowExample> enumerate_windows(const TimeSeries& ts, const SeasonalSpec& spec) {
  return enumerate_windows(ts, spec, feasible_anchors(ts.length(), spec));
}

DataSplit split_train_validation_test(int length, const SeasonalSpec& spec, int test_len, int val_len) {
  spec.validate();
  if (test_len < spec.horizon)
    throw ConfigError("test_len (" + std::to_string(test_len) + ") shorter than horizon (" +
                      std::to_string(spec.horizon) + ")");
  if (val_len != 0 && val_len < spec.horizon)
    throw ConfigError("val_len (" + std::to_string(val_len) + ") must be 0 or at least the horizon");

  DataSplit s;
  s.test_start = length - test_len;
  s.validation_start = s.test_start - val_len;
  const int first = spec.first_anchor();
  s.test = {s.test_start, length - spec.horizon};
  s.validation = val_len > 0 ? AnchorRange{s.validation_start, s.test_start - spec.horizon} : AnchorRange{};
  s.train = {first, s.validation_start - spec.horizon};

  if (s.test.first < first || (val_len > 0 && s.validation.first < first) || s.train.empty())
    throw ConfigError("splits exhaust feasible anchors: length " + std::to_string(length) + ", first feasible anchor " +
                      std::to_string(first) + ", test_len " + std::to_string(test_len) + ", val_len " +
                      std::to_string(val_len));
  return s;
}

}  // namespace sedx
