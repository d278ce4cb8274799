#include "sedx/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sedx {

std::vector<int> sarx_lags(const SeasonalSpec& spec) {
  std::vector<int> lags;
  for (int j = 1; j <= spec.ar_order; ++j) lags.push_back(j);
  for (int i = 1; i <= spec.seasonal_order; ++i)
    for (int j = 0; j <= spec.group_sizes[i - 1]; ++j) lags.push_back(i * spec.period + j);
  return lags;
}

SarxCoeffs SarxCoeffs::zeros(const SeasonalSpec& spec, int exo_dim) {
  spec.validate();
  SarxCoeffs c;
  c.spec = spec;
  c.exo_dim = exo_dim;
  c.ar = VectorXr::Zero(spec.ar_order);
  for (int i = 0; i < spec.seasonal_order; ++i) c.seasonal.push_back(VectorXr::Zero(spec.group_sizes[i] + 1));
  c.exo = MatrixXr::Zero(exo_dim > 0 ? 1 + static_cast<Eigen::Index>(sarx_lags(spec).size()) : 0, exo_dim);
  return c;
}

VectorXr SarxCoeffs::flatten() const {
  std::vector<double> v{intercept};
  v.insert(v.end(), ar.data(), ar.data() + ar.size());
  for (const auto& s : seasonal) v.insert(v.end(), s.data(), s.data() + s.size());
  v.insert(v.end(), exo.data(), exo.data() + exo.size());  // row-major: slot-major
  return Eigen::Map<VectorXr>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void SarxCoeffs::unflatten(const VectorXr& v) {
  Eigen::Index off = 0;
  intercept = v(off++);
  ar = v.segment(off, ar.size());
  off += ar.size();
  for (auto& s : seasonal) {
    s = v.segment(off, s.size());
    off += s.size();
  }
  std::copy(v.data() + off, v.data() + off + exo.size(), exo.data());
}

std::vector<std::string> SarxCoeffs::column_names() const {
  std::vector<std::string> names{"intercept"};
  const auto lags = sarx_lags(spec);
  for (int lag : lags) names.push_back("y(t-" + std::to_string(lag) + ")");
  if (exo_dim > 0) {
    std::vector<int> slots{0};
    slots.insert(slots.end(), lags.begin(), lags.end());
    for (int lag : slots)
      for (int j = 0; j < exo_dim; ++j)
        names.push_back("x" + std::to_string(j + 1) + (lag == 0 ? "(t)" : "(t-" + std::to_string(lag) + ")"));
  }
  return names;
}

std::vector<double> SarxCoeffs::lag_coefficients() const {
  std::vector<double> out(ar.data(), ar.data() + ar.size());
  for (const auto& s : seasonal) out.insert(out.end(), s.data(), s.data() + s.size());
  return out;
}

SarxCoeffs expand_multiplicative(const std::vector<double>& psi, const std::vector<double>& seasonal_psi,
                                 const SeasonalSpec& spec) {
  if (static_cast<int>(psi.size()) != spec.ar_order || static_cast<int>(seasonal_psi.size()) != spec.seasonal_order)
    throw ConfigError("expand_multiplicative: coefficient counts do not match the spec orders");
  for (int q : spec.group_sizes)
    if (q != spec.ar_order)
      throw ConfigError("expand_multiplicative: every group size must equal ar_order (got " + std::to_string(q) + ")");
  SarxCoeffs c = SarxCoeffs::zeros(spec, 0);
  for (int i = 0; i < spec.ar_order; ++i) c.ar(i) = psi[i];
  for (int k = 0; k < spec.seasonal_order; ++k) {
    c.seasonal[k](0) = seasonal_psi[k];
    for (int i = 1; i <= spec.ar_order; ++i) c.seasonal[k](i) = -psi[i - 1] * seasonal_psi[k];
  }
  return c;
}

namespace {

// Regressor row for target index t, aligned with SarxCoeffs::flatten().
void fill_row(const SarxCoeffs& c, const std::vector<int>& lags, const std::vector<double>& y, const MatrixXr& x,
              int t, Eigen::Ref<VectorXr> row) {
  Eigen::Index col = 0;
  row(col++) = 1.0;
  for (int lag : lags) row(col++) = y[t - lag];
  if (c.exo_dim > 0) {
    row.segment(col, c.exo_dim) = x.row(t).transpose();
    col += c.exo_dim;
    for (int lag : lags) {
      row.segment(col, c.exo_dim) = x.row(t - lag).transpose();
      col += c.exo_dim;
    }
  }
}

}  // namespace

SarxCoeffs fit_sarx(const TimeSeries& ts, const SeasonalSpec& spec, AnchorRange targets) {
  ts.validate();
  SarxCoeffs c = SarxCoeffs::zeros(spec, ts.exo_dim());
  const auto lags = sarx_lags(spec);
  const int first = std::max(targets.first, spec.first_anchor());
  const int last = std::min(targets.last, ts.length() - 1);
  const int rows = std::max(0, last - first + 1);
  const auto cols = c.flatten().size();
  if (rows < cols)
    throw ConfigError("fit_sarx: " + std::to_string(rows) + " usable targets for " + std::to_string(cols) +
                      " coefficients");

  MatrixXr design(rows, cols);
  VectorXr rhs(rows);
  VectorXr row(cols);
  for (int r = 0; r < rows; ++r) {
    fill_row(c, lags, ts.y, ts.x, first + r, row);
    design.row(r) = row.transpose();
    rhs(r) = ts.y[first + r];
  }

  // Scale columns so the rank threshold is not dominated by magnitudes.
  VectorXr norms = design.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < cols; ++j)
    if (norms(j) == 0) norms(j) = 1;
  const MatrixXr scaled = design * norms.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    const auto names = c.column_names();
    std::vector<std::string> dropped;
    std::string list;
    for (Eigen::Index k = qr.rank(); k < cols; ++k) {
      dropped.push_back(names[qr.colsPermutation().indices()(k)]);
      list += (list.empty() ? "" : ", ") + dropped.back();
    }
    throw RankDeficiencyError("fit_sarx: rank-deficient design, collinear columns: " + list, dropped);
  }
  const VectorXr beta = qr.solve(rhs).cwiseQuotient(norms);
  c.unflatten(beta);

  const VectorXr resid = rhs - design * beta;
  const double dof = static_cast<double>(rows - cols);
  c.residual_variance = dof > 0 ? resid.squaredNorm() / dof : 0.0;

  // (X'X)^-1 = D^-1 P R^-1 R^-T P' D^-1 for X D^-1 P = Q R.
  const Eigen::Index n = cols;
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd inner = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();
  c.standard_errors = (c.residual_variance * inner.diagonal()).cwiseSqrt().cwiseQuotient(norms);
  return c;
}

double sarx_one_step(const SarxCoeffs& c, const std::vector<double>& y, const MatrixXr& x, int t) {
  const auto lags = sarx_lags(c.spec);
  const auto coef = c.lag_coefficients();
  double v = c.intercept;
  for (std::size_t j = 0; j < lags.size(); ++j) v += coef[j] * y[t - lags[j]];
  if (c.exo_dim > 0) {
    v += c.exo.row(0).dot(x.row(t));
    for (std::size_t j = 0; j < lags.size(); ++j) v += c.exo.row(j + 1).dot(x.row(t - lags[j]));
  }
  return v;
}

VectorXr predict_sarx_recursive(const SarxCoeffs& c, const TimeSeries& ts, int t, int horizon) {
  if (t < c.spec.first_anchor())
    throw WindowRangeError("predict_sarx_recursive: anchor " + std::to_string(t) + " lacks history");
  if (c.exo_dim != ts.exo_dim()) throw ConfigError("predict_sarx_recursive: exogenous dimension mismatch");
  if (c.exo_dim > 0 && t + horizon - 1 > ts.length() - 1)
    throw ExogenousHorizonError("exogenous horizon unavailable for SARX forecast");
  std::vector<double> y(ts.y.begin(), ts.y.begin() + t);
  y.resize(t + horizon);
  VectorXr out(horizon);
  for (int k = 0; k < horizon; ++k) {
    y[t + k] = sarx_one_step(c, y, ts.x, t + k);
    out(k) = y[t + k];
  }
  return out;
}

VectorXr copy_previous(const TimeSeries& ts, int t, int horizon) {
  if (t < 1 || t > ts.length()) throw WindowRangeError("copy_previous: anchor " + std::to_string(t) + " out of range");
  return VectorXr::Constant(horizon, ts.y[t - 1]);
}

std::vector<double> acf(const std::vector<double>& series, int max_lag) {
  const auto n = static_cast<int>(series.size());
  if (max_lag < 0 || max_lag >= n) throw ConfigError("acf: max_lag must lie in [0, n-1]");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  auto autocov = [&](int k) {
    double s = 0;
    for (int t = 0; t + k < n; ++t) s += (series[t] - mean) * (series[t + k] - mean);
    return s / n;
  };
  const double c0 = autocov(0);
  if (!(c0 > 0)) throw UndefinedMetricError("acf: constant series has no autocorrelation");
  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  for (int k = 1; k <= max_lag; ++k) r[k] = autocov(k) / c0;
  return r;
}

std::vector<double> pacf(const std::vector<double>& series, int max_lag) {
  const auto r = acf(series, max_lag);
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  std::vector<double> phi, prev;
  for (int k = 1; k <= max_lag; ++k) {
    double num = r[k], den = 1.0;
    for (int j = 1; j < k; ++j) {
      num -= prev[j - 1] * r[k - j];
      den -= prev[j - 1] * r[j];
    }
    const double kk = num / den;
    phi.assign(k, 0.0);
    for (int j = 1; j < k; ++j) phi[j - 1] = prev[j - 1] - kk * prev[k - j - 1];
    phi[k - 1] = kk;
    out[k] = kk;
    prev = phi;
  }
  return out;
}

MatrixXr generate_exogenous(const ExoProcess& proc, int length, std::mt19937_64& rng) {
  MatrixXr x = MatrixXr::Zero(length, proc.dim);
  if (proc.dim == 0) return x;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < length; ++t)
    for (int j = 0; j < proc.dim; ++j) {
      const double prev = t > 0 ? x(t - 1, j) : 0.0;
      const double phase = 2.0 * std::numbers::pi * t / std::max(1, proc.period);
      x(t, j) = proc.ar_coef * prev + proc.amplitude * std::sin(phase) + proc.noise_sd * noise(rng);
    }
  return x;
}

TimeSeries synthesize_sarx(const SarxCoeffs& c, const NoiseSpec& noise, int length, const ExoProcess& exo,
                           std::uint64_t seed, std::string id) {
  if (length < 1) throw ConfigError("synthesize_sarx: length must be >= 1");
  if (noise.sigma < 0) throw ConfigError("synthesize_sarx: noise sigma must be >= 0");
  if (exo.dim != c.exo_dim) throw ConfigError("synthesize_sarx: exogenous process dimension differs from coefficients");
  const int burn = 10 * c.spec.period;
  const int total = burn + length;
  std::mt19937_64 rng(seed);
  const MatrixXr x = generate_exogenous(exo, total, rng);
  std::normal_distribution<double> eps(0.0, 1.0);

  const auto lags = sarx_lags(c.spec);
  const auto coef = c.lag_coefficients();
  std::vector<double> y(total, 0.0);
  for (int t = 0; t < total; ++t) {
    double v = c.intercept + noise.sigma * eps(rng);
    for (std::size_t j = 0; j < lags.size(); ++j)
      if (t - lags[j] >= 0) v += coef[j] * y[t - lags[j]];
    if (c.exo_dim > 0) {
      v += c.exo.row(0).dot(x.row(t));
      for (std::size_t j = 0; j < lags.size(); ++j)
        if (t - lags[j] >= 0) v += c.exo.row(j + 1).dot(x.row(t - lags[j]));
    }
    if (!(std::abs(v) <= 1e9))
      throw InstabilityError("synthesize_sarx: explosive coefficients, |y| exceeded 1e9 at step " + std::to_string(t));
    y[t] = v;
  }
  return TimeSeries(std::move(id), std::vector<double>(y.begin() + burn, y.end()), x.bottomRows(length));
}

}  // namespace sedx
