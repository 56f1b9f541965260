#pragma once

#include "occuhmm/hmm/model.hpp"

#include <span>
#include <vector>

namespace occuhmm {

// State distribution at the first index of a segment whose first covariate row
// is `z_first`, under the model's initial policy.
Vector segment_start_distribution(const HmmModel& model, std::span<const double> z_first);

// Log-likelihood summed over segments. Within a segment the covariate row at
// index t drives the transition into t; each segment restarts from the initial
// policy. Throws SupportError naming the first index at which every state
// density vanishes.
double forward_loglik(const HmmModel& model, const ObservationSeries& obs, const CovariateSeries& cov);

// Same as forward_loglik with precomputed log emission densities (T x N).
double forward_loglik(const HmmModel& model, const RowMatrix& log_emissions, const CovariateSeries& cov);

// Most probable state path per segment (0-based states). Ties go to the lower
// state index.
std::vector<int> viterbi(const HmmModel& model, const ObservationSeries& obs, const CovariateSeries& cov);

// delta(t) = delta(start) * Gamma(z_{start+1}) * ... * Gamma(z_t) per segment.
// Marginal state distribution given covariates only.
StateProbSeries propagate_state_probs(const HmmModel& model, const CovariateSeries& cov);

// Propagation over a bare covariate column treated as a single segment, with
// optional restarts every `restart_every` indices (0 = never). Returns only
// the T x N probability rows.
StateProbSeries propagate_column(const HmmModel& model, std::span<const double> column,
                                 std::size_t restart_every = 0);

}  // namespace occuhmm
