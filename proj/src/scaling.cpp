#include "sedx/scaling.hpp"

#include <algorithm>

namespace sedx {

ScaleParams fit_scale(const TimeSeries& ts) {
  ts.validate();
  ScaleParams p;
  const auto [lo, hi] = std::minmax_element(ts.y.begin(), ts.y.end());
  p.y = {*lo, *hi};
  for (int j = 0; j < ts.exo_dim(); ++j) p.x.push_back({ts.x.col(j).minCoeff(), ts.x.col(j).maxCoeff()});
  return p;
}

TimeSeries apply_scale(const TimeSeries& ts, const ScaleParams& params) {
  if (static_cast<int>(params.x.size()) != ts.exo_dim())
    throw ConfigError("apply_scale: scale parameters cover " + std::to_string(params.x.size()) +
                      " exogenous channels, series has " + std::to_string(ts.exo_dim()));
  TimeSeries out = ts;
  for (auto& v : out.y) v = params.y.apply(v);
  for (int j = 0; j < ts.exo_dim(); ++j)
    out.x.col(j) = ts.x.col(j).unaryExpr([&](double v) { return params.x[j].apply(v); });
  return out;
}

std::pair<TimeSeries, ScaleParams> scale(const TimeSeries& ts) {
  auto params = fit_scale(ts);
  return {apply_scale(ts, params), params};
}

VectorXr unscale(const VectorXr& values, const ChannelRange& range) {
  return values.unaryExpr([&](double v) { return range.invert(v); });
}

}  // namespace sedx
