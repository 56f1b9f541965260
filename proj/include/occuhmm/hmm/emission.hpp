#pragma once

#include "occuhmm/hmm/model.hpp"

#include <span>

namespace occuhmm {

// log I0(kappa), overflow-safe for large concentrations.
double log_bessel_i0(double kappa);

// Single-channel log densities; -inf outside the support.
double gaussian_log_density(double x, double mean, double sd);
double gamma_log_density(double x, double mean, double sd);
double von_mises_log_density(double x, double mean, double kappa);

struct DensityValue {
  double value = 0.0;
  bool in_support = true;
};

// Product of per-channel densities for `state` at observation row `x`.
// NaN channels are missing and contribute a factor of 1.
DensityValue emission_density(const EmissionSpec& spec, int state, std::span<const double> x);
double emission_log_density(const EmissionSpec& spec, int state, std::span<const double> x);

// T x N matrix of log emission densities for a whole series. Parameter
// validation happens once here; use this in likelihood loops.
RowMatrix log_emission_matrix(const EmissionSpec& spec, int n_states, const ObservationSeries& obs);

}  // namespace occuhmm
