#include "occuhmm/stats.hpp"

#include "occuhmm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace occuhmm::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw InputError("mean of an empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw InputError("variance needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

std::vector<double> quantiles(std::span<const double> x, std::span<const double> ps) {
  if (x.empty()) throw InputError("quantile of an empty series");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(ps.size());
  const double n1 = static_cast<double>(sorted.size() - 1);
  for (double p : ps) {
    if (!(p >= 0 && p <= 1)) throw InputError("quantile level must lie in [0,1]");
    const double h = n1 * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    out.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
  }
  return out;
}

double quantile(std::span<const double> x, double p) {
  const double ps[] = {p};
  return quantiles(x, ps).front();
}

double lag1_autocorrelation(std::span<const double> x) {
  if (x.size() < 3) throw InputError("autocorrelation needs at least three values");
  const double m = mean(x);
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    den += (x[t] - m) * (x[t] - m);
    if (t > 0) num += (x[t] - m) * (x[t - 1] - m);
  }
  return num / den;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("KS distance of an empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace occuhmm::stats
