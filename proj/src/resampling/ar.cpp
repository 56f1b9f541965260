#include "occuhmm/resampling/ar.hpp"

#include "occuhmm/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace occuhmm {

bool is_stationary(std::span<const double> phi) {
  const auto p = static_cast<Eigen::Index>(phi.size());
  if (p == 0) return true;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = phi[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = companion.eigenvalues();
  return eig.cwiseAbs().maxCoeff() < 1.0;
}

ArModel::ArModel(std::vector<double> phi, double intercept, double noise_sd)
    : phi_(std::move(phi)), intercept_(intercept), noise_sd_(noise_sd) {
  for (double v : phi_)
    if (!std::isfinite(v)) throw DomainError("AR coefficients must be finite");
  if (!std::isfinite(intercept_)) throw DomainError("AR intercept must be finite");
  if (!(noise_sd_ > 0) || !std::isfinite(noise_sd_)) throw DomainError("AR noise sd must be positive");
  if (!is_stationary(phi_)) throw DomainError("AR coefficients are not stationary");
}

double ArModel::process_mean() const {
  const double s = std::accumulate(phi_.begin(), phi_.end(), 0.0);
  return intercept_ / (1.0 - s);
}

std::vector<double> implied_autocorrelation(const ArModel& model, int max_lag) {
  const int p = model.order();
  const auto& phi = model.phi();
  std::vector<double> rho(static_cast<std::size_t>(std::max(max_lag, p)) + 1, 0.0);
  rho[0] = 1.0;
  if (p > 0) {
    // Yule-Walker: rho_k = sum_i phi_i rho_|k-i| for k = 1..p.
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (int k = 1; k <= p; ++k)
      for (int i = 1; i <= p; ++i) {
        const int lag = std::abs(k - i);
        if (lag == 0) b(k - 1) += phi[static_cast<std::size_t>(i - 1)];
        else a(k - 1, lag - 1) -= phi[static_cast<std::size_t>(i - 1)];
      }
    const Eigen::VectorXd r = a.fullPivLu().solve(b);
    for (int k = 1; k <= p; ++k) rho[static_cast<std::size_t>(k)] = r(k - 1);
  }
  for (int k = p + 1; k <= max_lag; ++k) {
    double v = 0.0;
    for (int i = 1; i <= p; ++i) v += phi[static_cast<std::size_t>(i - 1)] * rho[static_cast<std::size_t>(k - i)];
    rho[static_cast<std::size_t>(k)] = v;
  }
  rho.resize(static_cast<std::size_t>(max_lag) + 1);
  return rho;
}

ArFit fit_ar_detailed(std::span<const double> series, int max_order) {
  if (max_order < 0) throw InputError("max_order must be non-negative");
  const std::size_t T = series.size();
  if (T <= static_cast<std::size_t>(10 * std::max(max_order, 1)))
    throw InputError("series too short for AR order selection up to " + std::to_string(max_order));
  for (double v : series)
    if (!std::isfinite(v)) throw InputError("AR fitting needs finite values");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(T);
  Eigen::VectorXd y(static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t) y(static_cast<Eigen::Index>(t)) = series[t] - mean;
  if (y.squaredNorm() <= 1e-24 * std::max(1.0, mean * mean) * static_cast<double>(T))
    throw InputError("series has zero variance");

  const auto start = static_cast<Eigen::Index>(max_order);
  const Eigen::Index n = static_cast<Eigen::Index>(T) - start;
  const Eigen::VectorXd target = y.segment(start, n);

  struct Candidate {
    int order;
    double aic;
    std::vector<double> phi;
    double sd;
  };
  std::vector<Candidate> candidates;
  ArFit fit;
  for (int p = 0; p <= max_order; ++p) {
    std::vector<double> phi(static_cast<std::size_t>(p));
    double rss;
    if (p == 0) {
      rss = target.squaredNorm();
    } else {
      Eigen::MatrixXd x(n, p);
      for (int k = 0; k < p; ++k) x.col(k) = y.segment(start - 1 - k, n);
      const Eigen::VectorXd coef = x.colPivHouseholderQr().solve(target);
      rss = (target - x * coef).squaredNorm();
      for (int k = 0; k < p; ++k) phi[static_cast<std::size_t>(k)] = coef(k);
    }
    const double aic = static_cast<double>(n) * std::log(rss / static_cast<double>(n)) + 2.0 * (p + 1);
    fit.aic.push_back(aic);
    candidates.push_back({p, aic, std::move(phi), std::sqrt(rss / static_cast<double>(n - p))});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.aic < b.aic; });
  for (const auto& c : candidates) {
    if (!is_stationary(c.phi) || !(c.sd > 0)) continue;
    const double s = std::accumulate(c.phi.begin(), c.phi.end(), 0.0);
    fit.model = ArModel(c.phi, mean * (1.0 - s), c.sd);
    fit.selected_order = c.order;
    return fit;
  }
  throw NumericalError("no stationary AR candidate");
}

std::vector<double> simulate_ar(const ArModel& model, std::size_t length, std::uint64_t seed) {
  const auto p = static_cast<std::size_t>(model.order());
  const std::size_t warmup = 10 * p + 100;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, model.noise_sd());
  const double mu = model.process_mean();
  std::vector<double> lags(p, mu);  // lags[k] = Z_{t-1-k}
  std::vector<double> out;
  out.reserve(length);
  const auto& phi = model.phi();
  for (std::size_t t = 0; t < warmup + length; ++t) {
    double z = model.intercept();
    for (std::size_t k = 0; k < p; ++k) z += phi[k] * lags[k];
    z += noise(rng);
    if (p > 0) {
      std::copy_backward(lags.begin(), lags.end() - 1, lags.end());
      lags[0] = z;
    }
    if (t >= warmup) out.push_back(z);
  }
  return out;
}

}  // namespace occuhmm
