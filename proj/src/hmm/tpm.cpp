#include "occuhmm/hmm/tpm.hpp"

#include "occuhmm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace occuhmm {

void fill_tpm(const TransitionCoefficients& coeffs, std::span<const double> z, Matrix& out) {
  const int n = coeffs.n_states;
  const int p = coeffs.n_covariates;
  for (int i = 0; i < n; ++i) {
    double row_max = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) {
        out(i, j) = 0.0;
        continue;
      }
      const int k = coeffs.pair_index(i, j);
      double eta = coeffs.beta(k, 0);
      for (int q = 0; q < p; ++q) eta += coeffs.beta(k, q + 1) * z[static_cast<std::size_t>(q)];
      if (!std::isfinite(eta))
        throw OverflowError("non-finite linear predictor for transition " + std::to_string(i) +
                            "->" + std::to_string(j));
      out(i, j) = eta;
      row_max = std::max(row_max, eta);
    }
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = std::exp(out(i, j) - row_max);
      out(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < n; ++j) out(i, j) /= sum;
  }
}

Matrix tpm_from_covariates(const TransitionCoefficients& coeffs, std::span<const double> z) {
  coeffs.validate();
  if (z.size() != static_cast<std::size_t>(coeffs.n_covariates))
    throw InputError("covariate row has " + std::to_string(z.size()) + " entries, expected " +
                     std::to_string(coeffs.n_covariates));
  for (double v : z)
    if (!std::isfinite(v)) throw InputError("covariate values must be finite");
  Matrix out(coeffs.n_states, coeffs.n_states);
  fill_tpm(coeffs, z, out);
  return out;
}

}  // namespace occuhmm
