#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace occuhmm {

// Z_t = c + phi_1 Z_{t-1} + ... + phi_p Z_{t-p} + eps_t, eps_t ~ N(0, sd^2).
class ArModel {
 public:
  ArModel() = default;
  // Throws DomainError unless the process is stationary and sd > 0.
  ArModel(std::vector<double> phi, double intercept, double noise_sd);

  int order() const { return static_cast<int>(phi_.size()); }
  const std::vector<double>& phi() const { return phi_; }
  double intercept() const { return intercept_; }
  double noise_sd() const { return noise_sd_; }
  double process_mean() const;

 private:
  std::vector<double> phi_;
  double intercept_ = 0.0;
  double noise_sd_ = 1.0;
};

// Autocorrelations rho_0 .. rho_max_lag implied by a stationary model.
std::vector<double> implied_autocorrelation(const ArModel& model, int max_lag);

// True when every root of 1 - phi_1 x - ... - phi_p x^p lies outside the unit circle.
bool is_stationary(std::span<const double> phi);

struct ArFit {
  ArModel model;
  std::vector<double> aic;  // per candidate order 0..max_order
  int selected_order = 0;
};

// Conditional least squares on the mean-centred series for every order up to
// max_order, all on the same effective sample; the stationary candidate with
// the smallest AIC wins.
ArFit fit_ar_detailed(std::span<const double> series, int max_order = 5);
inline ArModel fit_ar(std::span<const double> series, int max_order = 5) {
  return fit_ar_detailed(series, max_order).model;
}

// Starts at the process mean and discards 10p + 100 warm-up steps.
std::vector<double> simulate_ar(const ArModel& model, std::size_t length, std::uint64_t seed);

}  // namespace occuhmm
