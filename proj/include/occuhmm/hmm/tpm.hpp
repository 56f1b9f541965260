#pragma once

#include "occuhmm/hmm/model.hpp"

#include <span>

namespace occuhmm {

// Gamma(z) under the multinomial-logit link with eta_ii = 0. Rows use a
// max-subtracted softmax; throws OverflowError if a linear predictor is not
// finite and InputError if z does not have P entries.
Matrix tpm_from_covariates(const TransitionCoefficients& coeffs, std::span<const double> z);

// Allocation-free variant for hot loops; `out` must already be N x N.
void fill_tpm(const TransitionCoefficients& coeffs, std::span<const double> z, Matrix& out);

}  // namespace occuhmm
