#pragma once

#include "occuhmm/hmm/model.hpp"

namespace occuhmm {

// Stationary distribution rho = rho * tpm with sum(rho) = 1, from the linear
// system (I - tpm^T + 1 1^T) rho = 1. Throws SingularityError when the chain
// has no unique stationary distribution (e.g. reducible).
Vector stationary_distribution(const Matrix& tpm);

}  // namespace occuhmm
