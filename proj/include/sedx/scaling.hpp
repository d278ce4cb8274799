// Per-sequence min-max normalization of every channel.
#pragma once

#include "sedx/windowing.hpp"

#include <vector>

namespace sedx {

struct ChannelRange {
  double min = 0;
  double max = 0;

  bool degenerate() const { return !(max > min); }
  /// (v - min) / (max - min); a degenerate channel maps to 0.
  double apply(double v) const { return degenerate() ? 0.0 : (v - min) / (max - min); }
  /// Inverse of apply; a degenerate channel returns the constant.
  double invert(double v) const { return degenerate() ? min : min + v * (max - min); }

  bool operator==(const ChannelRange&) const = default;
};

struct ScaleParams {
  ChannelRange y;
  std::vector<ChannelRange> x;

  bool operator==(const ScaleParams&) const = default;
};

/// Per-channel ranges of a series.
ScaleParams fit_scale(const TimeSeries& ts);

/// Applies `params` to every channel of `ts`.
TimeSeries apply_scale(const TimeSeries& ts, const ScaleParams& params);

/// Fits on `ts` and applies: every channel lands in [0, 1].
std::pair<TimeSeries, ScaleParams> scale(const TimeSeries& ts);

/// Maps endogenous values back to the original domain.
VectorXr unscale(const VectorXr& values, const ChannelRange& range);

}  // namespace sedx
