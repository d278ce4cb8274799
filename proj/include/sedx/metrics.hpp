// Forecast accuracy metrics and significance testing.
#pragma once

#include "sedx/numeric.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sedx {

/// Raised when a metric is mathematically undefined for its inputs.
class UndefinedMetricError : public std::domain_error {
 public:
  UndefinedMetricError(const std::string& what, int index = -1) : std::domain_error(what), index_(index) {}
  /// Offending position, or -1 when not tied to one element.
  int index() const { return index_; }

 private:
  int index_;
};

/// One forecast window in the original (unscaled) domain.
struct EvalWindow {
  VectorXr preds;
  VectorXr actuals;
  std::span<const double> train_reference;
};

/// Mean absolute percentage error (in percent). Throws on a zero actual.
double mape(const VectorXr& preds, const VectorXr& actuals);
double mape(const EvalWindow& w);

/// Mean absolute lag-`lag` difference of the training segment:
///   1/(n-lag) * sum_{j>lag} |x_j - x_{j-lag}|.
double mase_scale(std::span<const double> train, int lag);

/// Mean over steps of |pred - actual| / scale.
double mase_with_scale(const VectorXr& preds, const VectorXr& actuals, double scale);

/// MASE with a single lag-`lag` denominator shared by all steps.
double mase(const EvalWindow& w, int lag);

/// Variant where step i (1-based) is scaled by the lag-i copy-previous error.
double mase_per_step_lag(const EvalWindow& w);

/// Sum of absolute first differences.
double total_variation(std::span<const double> series);

struct WelchResult {
  double t = 0;
  double dof = 0;
  double p_two_sided = 1;
};

/// Welch's unequal-variance t-test. Each sample needs >= 2 points and
/// the pooled standard error must be positive.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

// ---------------------------------------------------------------------------
// Result tables

/// One evaluated window. MAPE is absent when an actual is zero.
struct WindowScore {
  std::string series_id;
  int anchor = 0;
  double mase = 0;
  std::optional<double> mape;
};

struct SequenceScore {
  std::string series_id;
  double mase = 0;
  std::optional<double> mape;  // mean over windows with a defined MAPE
  int windows = 0;
};

/// Per-sequence means, ordered by first appearance.
std::vector<SequenceScore> per_sequence(const std::vector<WindowScore>& windows);

struct Extremes {
  double max = 0, avg = 0, min = 0;
};

struct MetricSummary {
  std::vector<SequenceScore> sequences;
  Extremes mase;
  std::optional<Extremes> mape;
  int windows = 0;
  int windows_with_mape = 0;
};

MetricSummary summarize(const std::vector<WindowScore>& windows);

enum class Metric { Mase, Mape };

/// Candidate-vs-baseline breakdown over the sequences both tables share.
/// A sequence counts for the candidate only when its metric is strictly
/// lower; ties go to the baseline.
struct Comparison {
  Metric metric = Metric::Mase;
  int sequences = 0;
  int candidate_better = 0;
  double candidate_better_pct = 0;
  // Conditional means over the two partitions (NaN for an empty partition).
  double candidate_mean_when_better = 0, baseline_mean_when_better = 0;
  double candidate_mean_when_worse = 0, baseline_mean_when_worse = 0;
  std::optional<WelchResult> welch;  // over window-level values, when defined
};

Comparison compare(const std::vector<WindowScore>& candidate, const std::vector<WindowScore>& baseline, Metric metric);

}  // namespace sedx
