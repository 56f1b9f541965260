#include "occuhmm/resampling/seasonal.hpp"

#include "occuhmm/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace occuhmm {

double SeasonalTrend::evaluate(double time) const {
  const double a = 2.0 * std::numbers::pi * time / period;
  return coefficients[0] + coefficients[1] * std::sin(a) + coefficients[2] * std::cos(a);
}

std::vector<double> SeasonalTrend::evaluate(std::span<const double> times) const {
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = evaluate(times[i]);
  return out;
}

std::vector<double> SeasonalTrend::residuals(std::span<const double> series, std::span<const double> times) const {
  if (series.size() != times.size()) throw InputError("series and timestamps differ in length");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] - evaluate(times[i]);
  return out;
}

SeasonalTrend fit_seasonal_trend(std::span<const double> series, std::span<const double> times, double period) {
  if (series.size() != times.size()) throw InputError("series and timestamps differ in length");
  if (series.size() < 10) throw InputError("seasonal regression needs at least 10 observations");
  if (!(period > 0) || !std::isfinite(period)) throw InputError("period must be positive");
  const auto n = static_cast<Eigen::Index>(series.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = times[static_cast<std::size_t>(i)];
    const double v = series[static_cast<std::size_t>(i)];
    if (!std::isfinite(t) || !std::isfinite(v)) throw InputError("seasonal regression needs finite values");
    const double a = 2.0 * std::numbers::pi * t / period;
    x(i, 0) = 1.0;
    x(i, 1) = std::sin(a);
    x(i, 2) = std::cos(a);
    y(i) = v;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw SingularityError("seasonal regressors are collinear (too few distinct timestamps)");
  const Eigen::VectorXd beta = qr.solve(y);
  const double rss = (y - x * beta).squaredNorm();
  SeasonalTrend trend;
  trend.period = period;
  for (int k = 0; k < 3; ++k) trend.coefficients[static_cast<std::size_t>(k)] = beta(k);
  const double sigma2 = rss / static_cast<double>(n - 3);
  trend.residual_sd = std::sqrt(sigma2);
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  for (int k = 0; k < 3; ++k) trend.standard_errors[static_cast<std::size_t>(k)] = std::sqrt(sigma2 * xtx_inv(k, k));
  return trend;
}

}  // namespace occuhmm
