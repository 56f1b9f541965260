#pragma once

#include <span>
#include <vector>

namespace occuhmm::stats {

double mean(std::span<const double> x);
// Unbiased sample variance.
double variance(std::span<const double> x);
// Linear-interpolation quantile (type 7); p in [0,1].
double quantile(std::span<const double> x, double p);
std::vector<double> quantiles(std::span<const double> x, std::span<const double> ps);
double lag1_autocorrelation(std::span<const double> x);
// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_distance(std::span<const double> a, std::span<const double> b);

}  // namespace occuhmm::stats
