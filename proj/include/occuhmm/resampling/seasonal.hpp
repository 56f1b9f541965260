#pragma once

#include <array>
#include <span>
#include <vector>

namespace occuhmm {

// z(t) = b0 + b1 sin(2 pi t / period) + b2 cos(2 pi t / period)
struct SeasonalTrend {
  double period = 365.0;
  std::array<double, 3> coefficients{0.0, 0.0, 0.0};
  std::array<double, 3> standard_errors{0.0, 0.0, 0.0};
  double residual_sd = 0.0;

  double evaluate(double time) const;
  std::vector<double> evaluate(std::span<const double> times) const;
  std::vector<double> residuals(std::span<const double> series, std::span<const double> times) const;
};

// Ordinary least squares on intercept, sine and cosine. Throws
// SingularityError when the regressors are collinear.
SeasonalTrend fit_seasonal_trend(std::span<const double> series, std::span<const double> times,
                                 double period = 365.0);

}  // namespace occuhmm
