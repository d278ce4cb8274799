#include "sedx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace sedx {

double mape(const VectorXr& preds, const VectorXr& actuals) {
  detail::require(preds.size() == actuals.size() && preds.size() > 0, "mape: length mismatch");
  double sum = 0;
  for (Eigen::Index i = 0; i < actuals.size(); ++i) {
    if (actuals(i) == 0.0)
      throw UndefinedMetricError("undefined MAPE: actual is zero at step " + std::to_string(i), static_cast<int>(i));
    sum += std::abs(preds(i) - actuals(i)) / std::abs(actuals(i));
  }
  return 100.0 * sum / static_cast<double>(actuals.size());
}

double mape(const EvalWindow& w) { return mape(w.preds, w.actuals); }

double mase_scale(std::span<const double> train, int lag) {
  const auto n = static_cast<int>(train.size());
  if (lag < 1) throw ConfigError("MASE lag must be >= 1");
  if (n <= lag)
    throw UndefinedMetricError("MASE: training segment of length " + std::to_string(n) + " too short for lag " +
                               std::to_string(lag));
  double sum = 0;
  for (int j = lag; j < n; ++j) sum += std::abs(train[j] - train[j - lag]);
  const double scale = sum / static_cast<double>(n - lag);
  if (!(scale > 0)) throw UndefinedMetricError("MASE: zero denominator (constant training segment)");
  return scale;
}

double mase_with_scale(const VectorXr& preds, const VectorXr& actuals, double scale) {
  detail::require(preds.size() == actuals.size() && preds.size() > 0, "mase: length mismatch");
  return (preds - actuals).cwiseAbs().mean() / scale;
}

double mase(const EvalWindow& w, int lag) {
  return mase_with_scale(w.preds, w.actuals, mase_scale(w.train_reference, lag));
}

double mase_per_step_lag(const EvalWindow& w) {
  detail::require(w.preds.size() == w.actuals.size() && w.preds.size() > 0, "mase: length mismatch");
  double sum = 0;
  for (Eigen::Index i = 0; i < w.preds.size(); ++i)
    sum += std::abs(w.preds(i) - w.actuals(i)) / mase_scale(w.train_reference, static_cast<int>(i) + 1);
  return sum / static_cast<double>(w.preds.size());
}

double total_variation(std::span<const double> series) {
  double tv = 0;
  for (std::size_t i = 1; i < series.size(); ++i) tv += std::abs(series[i] - series[i - 1]);
  return tv;
}

// ---------------------------------------------------------------------------
// Student t tail via the incomplete beta function

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1) < kEps) return h;
  }
  throw InternalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw ConfigError("incomplete_beta: shape parameters must be positive");
  if (x < 0 || x > 1) throw ConfigError("incomplete_beta: x outside [0,1]");
  if (x == 0 || x == 1) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(a, b, x) / a;
  return 1 - front * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0)) throw ConfigError("student t: degrees of freedom must be positive");
  if (t == 0) return 1.0;
  return incomplete_beta(dof / 2, 0.5, dof / (dof + t * t));
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw UndefinedMetricError("Welch test needs at least 2 points per sample");
  auto moments = [](std::span<const double> s) {
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / (n - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  if (!(sa + sb > 0)) throw UndefinedMetricError("Welch test: both samples have zero variance");

  WelchResult r;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
  r.p_two_sided = student_t_two_sided_p(r.t, r.dof);
  return r;
}

// ---------------------------------------------------------------------------
// Tables

std::vector<SequenceScore> per_sequence(const std::vector<WindowScore>& windows) {
  std::vector<SequenceScore> out;
  std::map<std::string, std::size_t> index;
  std::vector<double> mape_sum;
  std::vector<int> mape_count;
  for (const auto& w : windows) {
    auto [it, inserted] = index.try_emplace(w.series_id, out.size());
    if (inserted) {
      out.push_back({w.series_id, 0.0, std::nullopt, 0});
      mape_sum.push_back(0);
      mape_count.push_back(0);
    }
    auto& s = out[it->second];
    s.mase += w.mase;
    s.windows += 1;
    if (w.mape) {
      mape_sum[it->second] += *w.mape;
      mape_count[it->second] += 1;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].mase /= out[i].windows;
    if (mape_count[i] > 0) out[i].mape = mape_sum[i] / mape_count[i];
  }
  return out;
}

namespace {

Extremes extremes(const std::vector<double>& v) {
  Extremes e;
  e.max = *std::max_element(v.begin(), v.end());
  e.min = *std::min_element(v.begin(), v.end());
  e.avg = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return e;
}

double mean_or_nan(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

MetricSummary summarize(const std::vector<WindowScore>& windows) {
  if (windows.empty()) throw UndefinedMetricError("summarize: no windows");
  MetricSummary s;
  s.sequences = per_sequence(windows);
  s.windows = static_cast<int>(windows.size());
  for (const auto& w : windows) s.windows_with_mape += w.mape ? 1 : 0;
  std::vector<double> mase, mape;
  for (const auto& q : s.sequences) {
    mase.push_back(q.mase);
    if (q.mape) mape.push_back(*q.mape);
  }
  s.mase = extremes(mase);
  if (!mape.empty()) s.mape = extremes(mape);
  return s;
}

Comparison compare(const std::vector<WindowScore>& candidate, const std::vector<WindowScore>& baseline,
                   Metric metric) {
  auto value = [metric](const SequenceScore& s) -> std::optional<double> {
    return metric == Metric::Mase ? std::optional<double>(s.mase) : s.mape;
  };
  const auto cand = per_sequence(candidate);
  const auto base = per_sequence(baseline);
  std::map<std::string, double> base_by_id;
  for (const auto& s : base)
    if (auto v = value(s)) base_by_id[s.series_id] = *v;

  Comparison c;
  c.metric = metric;
  std::vector<double> cb, bb, cw, bw;
  for (const auto& s : cand) {
    auto cv = value(s);
    auto it = base_by_id.find(s.series_id);
    if (!cv || it == base_by_id.end()) continue;
    ++c.sequences;
    if (*cv < it->second) {
      ++c.candidate_better;
      cb.push_back(*cv);
      bb.push_back(it->second);
    } else {
      cw.push_back(*cv);
      bw.push_back(it->second);
    }
  }
  if (c.sequences == 0) throw UndefinedMetricError("compare: no sequences shared by both tables");
  c.candidate_better_pct = 100.0 * c.candidate_better / c.sequences;
  c.candidate_mean_when_better = mean_or_nan(cb);
  c.baseline_mean_when_better = mean_or_nan(bb);
  c.candidate_mean_when_worse = mean_or_nan(cw);
  c.baseline_mean_when_worse = mean_or_nan(bw);

  auto window_values = [metric](const std::vector<WindowScore>& ws) {
    std::vector<double> v;
    for (const auto& w : ws) {
      if (metric == Metric::Mase)
        v.push_back(w.mase);
      else if (w.mape)
        v.push_back(*w.mape);
    }
    return v;
  };
  const auto va = window_values(candidate);
  const auto vb = window_values(baseline);
  try {
    c.welch = welch_t(va, vb);
  } catch (const UndefinedMetricError&) {
    c.welch.reset();
  }
  return c;
}

}  // namespace sedx
