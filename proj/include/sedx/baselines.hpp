// Linear seasonal autoregression with exogenous inputs (SARX), the
// copy-previous predictor, correlation diagnostics and a SARX simulator.
#pragma once

#include "sedx/metrics.hpp"
#include "sedx/numeric.hpp"
#include "sedx/windowing.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sedx {

/// Lags regressed by a SARX model: 1..p, then for every seasonal cycle i the
/// lag i*period followed by the group i*period+1 .. i*period+group_sizes[i-1].
std::vector<int> sarx_lags(const SeasonalSpec& spec);

/// Coefficients of
///   y(t) = intercept + sum_j ar[j-1] y(t-j)
///        + sum_i sum_j seasonal[i-1][j] y(t - i*period - j)
///        + sum_s exo.row(s) . x(t - exo_lag(s)),
/// where exo slot 0 is x(t) and slot s >= 1 pairs with sarx_lags(spec)[s-1].
struct SarxCoeffs {
  SeasonalSpec spec;
  int exo_dim = 0;
  VectorXr ar;                    // length ar_order
  std::vector<VectorXr> seasonal; // [cycle], length group_size + 1, index 0 is the pure seasonal lag
  MatrixXr exo;                   // (1 + number of lags) x exo_dim
  double intercept = 0;

  // Filled by fit_sarx.
  double residual_variance = 0;
  VectorXr standard_errors;  // aligned with flatten()

  static SarxCoeffs zeros(const SeasonalSpec& spec, int exo_dim);

  /// intercept, ar, seasonal (cycle-major), exo (slot-major).
  VectorXr flatten() const;
  void unflatten(const VectorXr& v);
  std::vector<std::string> column_names() const;

  /// Coefficient on y(t - lag), aligned with sarx_lags(spec).
  std::vector<double> lag_coefficients() const;
};

/// Raised when the least-squares design is rank deficient.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, std::vector<std::string> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multiplies out (1 - sum psi_i L^i)(1 - sum Psi_k L^{k*period}). Requires
/// every group size to equal the AR order.
SarxCoeffs expand_multiplicative(const std::vector<double>& psi, const std::vector<double>& seasonal_psi,
                                 const SeasonalSpec& spec);

/// Ordinary least squares (column-pivoted Householder QR) of y(t) on all SARX
/// regressors for t in `targets` (clipped to indices with full history).
SarxCoeffs fit_sarx(const TimeSeries& ts, const SeasonalSpec& spec, AnchorRange targets);

/// One-step prediction of y(t) from the values in `y` (and rows of `x`).
double sarx_one_step(const SarxCoeffs& c, const std::vector<double>& y, const MatrixXr& x, int t);

/// Multi-step forecast from anchor t by feeding earlier predictions back in.
VectorXr predict_sarx_recursive(const SarxCoeffs& c, const TimeSeries& ts, int t, int horizon);

/// Repeats y(t-1) over the horizon.
VectorXr copy_previous(const TimeSeries& ts, int t, int horizon);

/// Sample autocorrelations r_0..r_max_lag (r_0 = 1).
std::vector<double> acf(const std::vector<double>& series, int max_lag);

/// Partial autocorrelations via the Durbin-Levinson recursion; index 0 holds 1.
std::vector<double> pacf(const std::vector<double>& series, int max_lag);

struct NoiseSpec {
  double sigma = 0;
};

/// Exogenous process, per channel:
///   x(t) = ar_coef * x(t-1) + amplitude * sin(2 pi t / period) + N(0, noise_sd).
struct ExoProcess {
  int dim = 0;
  double ar_coef = 0;
  double noise_sd = 1;
  double amplitude = 0;
  int period = 1;
};

MatrixXr generate_exogenous(const ExoProcess& proc, int length, std::mt19937_64& rng);

/// Simulates the SARX recurrence from zero initial conditions, discarding
/// 10 * period burn-in samples. Throws InstabilityError if |y| exceeds 1e9.
TimeSeries synthesize_sarx(const SarxCoeffs& c, const NoiseSpec& noise, int length, const ExoProcess& exo,
                           std::uint64_t seed, std::string id = "synthetic");

}  // namespace sedx
